#pragma once

#include <string>
#include <vector>

namespace panocnav {

/// Entry point behind the panocnav binary. Returns the process exit code:
/// 0 on success, 1 on mission or solver failure, 2 on usage or parse errors.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace panocnav
