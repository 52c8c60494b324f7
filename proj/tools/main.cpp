#include "panocnav/cli.hpp"

int main(int argc, char** argv) { return panocnav::run_cli(argc, argv); }
