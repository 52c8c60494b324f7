#include "panocnav/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "panocnav/scenario.hpp"

namespace panocnav {

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitFailure = 1;  // mission or solver failure
constexpr int kExitUsage = 2;    // usage or parse errors

struct CommonOptions {
    std::string out;
    int max_steps = -1;
    double tol = -1.0;
    double eta = -1.0;
    bool quiet = false;
};

void apply_overrides(ScenarioFile& scenario, const CommonOptions& opt) {
    if (opt.max_steps > 0) scenario.mission.max_mpc_steps = opt.max_steps;
    if (opt.tol > 0.0) scenario.solver.tau_star = opt.tol;
    if (opt.eta > 0.0) scenario.solver.eta_star = opt.eta;
}

std::string default_out(const std::string& scenario_path, const char* suffix) {
    std::string stem = scenario_path;
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos &&
                                           stem.find('/', dot) == std::string::npos)
        stem = stem.substr(0, dot);
    return stem + suffix;
}

int cmd_solve(const std::string& path, const CommonOptions& opt) {
    ScenarioFile scenario = load_scenario(path);
    apply_overrides(scenario, opt);
    ProblemSpec spec = scenario.make_problem();

    ControlSequence u0(spec.horizon);
    PenaltyMatrix mu0 = uniform_penalties(static_cast<int>(spec.obstacles.size()),
                                          spec.horizon, scenario.solver.mu0);
    PenaltyOutcome outcome = penalty_solve(spec, mu0, u0, scenario.solver);

    std::vector<VehicleState> states = rollout(spec.model, spec.q0, outcome.controls, spec.ts);
    ViolationReport true_violation = max_true_violation(spec, states);

    if (!opt.quiet) {
        std::printf("status:            %s\n", to_string(outcome.status).c_str());
        std::printf("objective:         %.6g\n", outcome.objective_value);
        std::printf("residual:          %.3e\n", outcome.final_residual);
        std::printf("max violation:     %.3e (enlarged), %.3e (true)\n",
                    outcome.max_violation, true_violation.overall);
        std::printf("outer iterations:  %d\n", outcome.outer_iterations);
        std::printf("inner iterations:  %ld\n", outcome.total_inner_iterations);
        std::printf("solve time:        %.2f ms\n", outcome.solve_time_ms);
    }

    TrajectoryLog log;
    ViolationReport enlarged_violation = max_obstacle_violation(spec, states);
    for (int k = 0; k <= spec.horizon; ++k) {
        TrajectoryRow row;
        row.step = k;
        row.time_s = k * spec.ts;
        row.x = states[k].x;
        row.y = states[k].y;
        row.theta = states[k].theta;
        if (k < spec.horizon) {
            row.u0 = outcome.controls.input(k)[0];
            row.u1 = outcome.controls.input(k)[1];
        }
        if (k >= 1) {
            row.max_psi_enlarged = enlarged_violation.per_stage[k - 1];
            row.max_psi_true = true_violation.per_stage[k - 1];
        }
        if (k == 0) {
            row.inner_iterations = outcome.total_inner_iterations;
            row.outer_iterations = outcome.outer_iterations;
            row.solve_time_ms = outcome.solve_time_ms;
        }
        log.rows.push_back(row);
    }
    std::string out = opt.out.empty() ? default_out(path, "_openloop.csv") : opt.out;
    write_trajectory(log, out);
    if (!opt.quiet) std::printf("open-loop trajectory written to %s\n", out.c_str());

    return outcome.status == PenaltyStatus::Feasible ? kExitSuccess : kExitFailure;
}

int cmd_simulate(const std::string& path, const CommonOptions& opt) {
    ScenarioFile scenario = load_scenario(path);
    apply_overrides(scenario, opt);

    MissionLog mission = run_mission(scenario.make_problem(), scenario.solver, scenario.mission);
    TrajectoryLog log = TrajectoryLog::from_mission(mission, scenario.ts);

    std::string out = opt.out.empty() ? default_out(path, ".csv") : opt.out;
    write_trajectory(log, out);

    if (!opt.quiet) {
        const VehicleState& final_state = mission.records.back().state;
        std::printf("status:           %s\n", to_string(mission.status).c_str());
        std::printf("steps:            %zu\n", mission.records.size() - 1);
        std::printf("final state:      (%.3f, %.3f, %.3f)\n", final_state.x, final_state.y,
                    final_state.theta);
        std::printf("closed-loop cost: %.6g\n", mission.closed_loop_cost);
        std::printf("emergency stops:  %d\n", mission.emergency_stops);
        std::printf("graph searches:   %d\n", mission.graph_searches);
        std::printf("trajectory written to %s\n", out.c_str());
    }
    return mission.status == MissionStatus::Reached ? kExitSuccess : kExitFailure;
}

int cmd_plot(const std::string& scenario_path, const std::string& log_path,
             const std::string& out_path, const CommonOptions& opt) {
    ScenarioFile scenario = load_scenario(scenario_path);
    TrajectoryLog log = read_trajectory(log_path);
    emit_plot(scenario, log, out_path);
    if (!opt.quiet) std::printf("plot written to %s\n", out_path.c_str());
    return kExitSuccess;
}

int cmd_grid(const std::string& path, const CommonOptions& opt) {
    ScenarioFile scenario = load_scenario(path);
    apply_overrides(scenario, opt);

    OccupancyGrid grid = rasterize(scenario.obstacles, scenario.mission.workspace,
                                   scenario.mission.grid_resolution);
    auto start = grid.nearest_free(grid.cell_of({scenario.start.x, scenario.start.y}), 10);
    auto goal = grid.nearest_free(grid.cell_of({scenario.goal.x, scenario.goal.y}), 10);
    std::optional<std::vector<GridCell>> path_cells;
    if (start && goal) path_cells = astar(grid, *start, *goal);

    std::vector<std::string> canvas(grid.height(), std::string(grid.width(), '.'));
    for (int iy = 0; iy < grid.height(); ++iy)
        for (int ix = 0; ix < grid.width(); ++ix)
            if (grid.occupied({ix, iy})) canvas[iy][ix] = '#';
    int waypoint_count = 0;
    if (path_cells) {
        for (const GridCell& c : *path_cells) canvas[c.iy][c.ix] = '*';
        waypoint_count = static_cast<int>(extract_waypoints(grid, *path_cells).size());
    }
    if (start) canvas[start->iy][start->ix] = 'S';
    if (goal) canvas[goal->iy][goal->ix] = 'G';

    if (!opt.quiet) {
        // top row printed first so y points up
        for (int iy = grid.height() - 1; iy >= 0; --iy)
            std::printf("%s\n", canvas[iy].c_str());
        std::printf("grid %dx%d, resolution %.3g m\n", grid.width(), grid.height(),
                    grid.resolution());
        if (path_cells)
            std::printf("path: %zu cells, %d waypoints\n", path_cells->size(), waypoint_count);
        else
            std::printf("no path\n");
    }
    return path_cells ? kExitSuccess : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Obstacle-avoiding nonlinear MPC: penalty method around a PANOC solver"};
    app.require_subcommand(1);
    CommonOptions opt;

    std::string scenario_path, log_path, svg_path;

    CLI::App* solve = app.add_subcommand("solve", "One open-loop penalty solve");
    solve->add_option("scenario", scenario_path, "scenario file")->required();
    solve->add_option("--out", opt.out, "output CSV path");
    solve->add_option("--tol", opt.tol, "override tau_star");
    solve->add_option("--eta", opt.eta, "override eta_star");
    solve->add_flag("--quiet", opt.quiet, "suppress output");

    CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop MPC mission");
    simulate->add_option("scenario", scenario_path, "scenario file")->required();
    simulate->add_option("--out", opt.out, "output CSV path");
    simulate->add_option("--max-steps", opt.max_steps, "override the MPC step limit");
    simulate->add_option("--tol", opt.tol, "override tau_star");
    simulate->add_option("--eta", opt.eta, "override eta_star");
    simulate->add_flag("--quiet", opt.quiet, "suppress output");

    CLI::App* plot = app.add_subcommand("plot", "Render a trajectory SVG");
    plot->add_option("scenario", scenario_path, "scenario file")->required();
    plot->add_option("log", log_path, "trajectory CSV")->required();
    plot->add_option("out", svg_path, "output SVG path")->required();
    plot->add_flag("--quiet", opt.quiet, "suppress output");

    CLI::App* grid = app.add_subcommand("grid", "Print the occupancy grid and A* path");
    grid->add_option("scenario", scenario_path, "scenario file")->required();
    grid->add_flag("--quiet", opt.quiet, "suppress output");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitSuccess;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(scenario_path, opt);
        if (simulate->parsed()) return cmd_simulate(scenario_path, opt);
        if (plot->parsed()) return cmd_plot(scenario_path, log_path, svg_path, opt);
        if (grid->parsed()) return cmd_grid(scenario_path, opt);
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc) - 1);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace panocnav
