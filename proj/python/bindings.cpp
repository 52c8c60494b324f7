#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "panocnav/mission.hpp"
#include "panocnav/scenario.hpp"

namespace py = pybind11;
using namespace panocnav;

namespace {

ObstacleSpec make_obstacle(const std::vector<std::string>& true_exprs,
                           const std::vector<std::string>& enlarged_exprs,
                           double enlargement, const std::string& label) {
    std::vector<ConstraintExpr> true_list;
    for (const auto& t : true_exprs) true_list.push_back(ConstraintExpr::parse(t));
    if (!enlarged_exprs.empty()) {
        std::vector<ConstraintExpr> enlarged;
        for (const auto& t : enlarged_exprs) enlarged.push_back(ConstraintExpr::parse(t));
        return ObstacleSpec::from_pair(std::move(enlarged), std::move(true_list), label);
    }
    return ObstacleSpec::from_true(std::move(true_list), enlargement, label);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Obstacle-avoiding nonlinear MPC with a quadratic penalty method and PANOC";

    py::register_exception<ParseError>(m, "ExprParseError");
    py::register_exception<EvaluationError>(m, "EvaluationError");
    py::register_exception<ScenarioError>(m, "ScenarioLoadError");

    py::class_<ConstraintExpr>(m, "ConstraintExpr")
        .def_static("parse", &ConstraintExpr::parse, py::arg("text"))
        .def("eval", &ConstraintExpr::eval, py::arg("x"), py::arg("y"))
        .def("grad",
             [](const ConstraintExpr& e, double x, double y) {
                 double dx, dy;
                 e.gradient(x, y, dx, dy);
                 return std::make_pair(dx, dy);
             })
        .def("__str__", &ConstraintExpr::to_string);
    m.def("parse_constraint", &ConstraintExpr::parse, py::arg("text"));

    py::class_<ObstacleSpec>(m, "ObstacleSpec")
        .def(py::init(&make_obstacle), py::arg("true_constraints"),
             py::arg("enlarged_constraints") = std::vector<std::string>{},
             py::arg("enlargement") = 0.0, py::arg("label") = "")
        .def_readonly("enlargement", &ObstacleSpec::enlargement)
        .def_readonly("label", &ObstacleSpec::label)
        .def_property_readonly("constraints",
                               [](const ObstacleSpec& ob) {
                                   std::vector<std::string> out;
                                   for (const auto& c : ob.constraints)
                                       out.push_back(c.to_string());
                                   return out;
                               })
        .def("psi",
             [](const ObstacleSpec& ob, double x, double y) {
                 return eval_psi(ob, {x, y});
             })
        .def("psi_true",
             [](const ObstacleSpec& ob, double x, double y) {
                 return eval_psi_true(ob, {x, y});
             })
        .def("penalty", [](const ObstacleSpec& ob, double x, double y, double mu) {
            PenaltyEval pe = eval_penalty_gradient(ob, {x, y}, mu);
            return std::make_tuple(pe.value, pe.grad_x, pe.grad_y);
        });
    m.def("apply_enlargement", &apply_enlargement, py::arg("obstacle"));

    py::class_<VehicleState>(m, "VehicleState")
        .def(py::init([](double x, double y, double theta) {
                 return VehicleState{x, y, theta};
             }),
             py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("theta") = 0.0)
        .def_readwrite("x", &VehicleState::x)
        .def_readwrite("y", &VehicleState::y)
        .def_readwrite("theta", &VehicleState::theta)
        .def("__repr__", [](const VehicleState& s) {
            return "VehicleState(" + std::to_string(s.x) + ", " + std::to_string(s.y) +
                   ", " + std::to_string(s.theta) + ")";
        });

    py::class_<VehicleModel>(m, "VehicleModel")
        .def(py::init([](const std::string& kind, double length) {
                 return VehicleModel(vehicle_kind_from_string(kind), length);
             }),
             py::arg("kind"), py::arg("length"))
        .def_property_readonly("kind",
                               [](const VehicleModel& v) { return to_string(v.kind); })
        .def_readonly("length", &VehicleModel::wheelbase);

    m.def(
        "continuous_dynamics",
        [](const VehicleModel& model, const VehicleState& q, const Eigen::Vector2d& u) {
            return continuous_dynamics(model, q, u);
        },
        py::arg("model"), py::arg("q"), py::arg("u"));
    m.def("rk4_step", &rk4_step, py::arg("model"), py::arg("q"), py::arg("u"), py::arg("ts"));
    m.def(
        "rollout",
        [](const VehicleModel& model, const VehicleState& q0, const Eigen::VectorXd& u,
           double ts) {
            ControlSequence seq(static_cast<int>(u.size()) / 2, u);
            std::vector<VehicleState> states = rollout(model, q0, seq, ts);
            Eigen::MatrixXd out(states.size(), 3);
            for (std::size_t i = 0; i < states.size(); ++i) out.row(i) = states[i].vec();
            return out;
        },
        py::arg("model"), py::arg("q0"), py::arg("controls"), py::arg("ts"));

    py::class_<CostWeights>(m, "CostWeights")
        .def(py::init<>())
        .def_readwrite("Q", &CostWeights::Q)
        .def_readwrite("R", &CostWeights::R)
        .def_readwrite("QN", &CostWeights::QN)
        .def_readwrite("q_ref", &CostWeights::q_ref)
        .def_readwrite("u_ref", &CostWeights::u_ref);

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def(py::init<>())
        .def_readwrite("model", &ProblemSpec::model)
        .def_readwrite("ts", &ProblemSpec::ts)
        .def_readwrite("horizon", &ProblemSpec::horizon)
        .def_readwrite("weights", &ProblemSpec::weights)
        .def_readwrite("obstacles", &ProblemSpec::obstacles)
        .def_readwrite("q0", &ProblemSpec::q0)
        .def_property(
            "input_bounds",
            [](const ProblemSpec& s) {
                return std::make_pair(s.input_box.lower, s.input_box.upper);
            },
            [](ProblemSpec& s, std::pair<Eigen::Vector2d, Eigen::Vector2d> b) {
                s.input_box.lower = b.first;
                s.input_box.upper = b.second;
            });

    m.def(
        "eval_objective",
        [](const ProblemSpec& spec, const Eigen::MatrixXd& mu, const Eigen::VectorXd& u) {
            return eval_objective(spec, mu, ControlSequence(spec.horizon, u));
        },
        py::arg("spec"), py::arg("mu"), py::arg("controls"));
    m.def(
        "eval_objective_gradient",
        [](const ProblemSpec& spec, const Eigen::MatrixXd& mu, const Eigen::VectorXd& u) {
            ObjectiveValueGrad vg =
                eval_objective_gradient(spec, mu, ControlSequence(spec.horizon, u));
            return std::make_pair(vg.value, vg.gradient);
        },
        py::arg("spec"), py::arg("mu"), py::arg("controls"));
    m.def(
        "max_obstacle_violation",
        [](const ProblemSpec& spec, const Eigen::VectorXd& u) {
            ViolationReport r = max_obstacle_violation(spec, ControlSequence(spec.horizon, u));
            return std::make_pair(r.per_stage, r.overall);
        },
        py::arg("spec"), py::arg("controls"));

    py::class_<SolveReport>(m, "SolveReport")
        .def_property_readonly("status",
                               [](const SolveReport& r) { return to_string(r.status); })
        .def_readonly("residual", &SolveReport::residual)
        .def_readonly("iterations", &SolveReport::iterations)
        .def_readonly("gamma", &SolveReport::gamma)
        .def_readonly("objective", &SolveReport::objective)
        .def_readonly("wall_time_ms", &SolveReport::wall_time_ms)
        .def_readonly("objective_evals", &SolveReport::objective_evals)
        .def_readonly("lipschitz_updates", &SolveReport::lipschitz_updates)
        .def_readonly("fbe_descent_violations", &SolveReport::fbe_descent_violations);

    m.def(
        "panoc_solve",
        [](const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>& fn,
           const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
           const Eigen::VectorXd& u0, double tolerance, int max_iterations,
           int lbfgs_memory) {
            PanocConfig config;
            config.tolerance = tolerance;
            config.max_iterations = max_iterations;
            config.lbfgs_memory = lbfgs_memory;
            ObjectiveFn objective = [&fn](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
                auto [value, g] = fn(u);
                if (grad) *grad = g;
                return value;
            };
            PanocResult result = panoc_solve(objective, Box(lower, upper), u0, config);
            return std::make_pair(result.solution, result.report);
        },
        py::arg("objective"), py::arg("lower"), py::arg("upper"), py::arg("u0"),
        py::arg("tolerance") = 1e-6, py::arg("max_iterations") = 500,
        py::arg("lbfgs_memory") = 10);

    py::class_<PenaltyConfig>(m, "PenaltyConfig")
        .def(py::init<>())
        .def_readwrite("mu0", &PenaltyConfig::mu0)
        .def_readwrite("omega", &PenaltyConfig::omega)
        .def_readwrite("eta_star", &PenaltyConfig::eta_star)
        .def_readwrite("tau_star", &PenaltyConfig::tau_star)
        .def_readwrite("mu_cap", &PenaltyConfig::mu_cap)
        .def_readwrite("max_outer_iterations", &PenaltyConfig::max_outer_iterations);

    py::class_<PenaltyOutcome>(m, "PenaltyOutcome")
        .def_property_readonly("status",
                               [](const PenaltyOutcome& o) { return to_string(o.status); })
        .def_property_readonly("controls",
                               [](const PenaltyOutcome& o) { return o.controls.stacked(); })
        .def_readonly("mu", &PenaltyOutcome::mu)
        .def_readonly("max_violation", &PenaltyOutcome::max_violation)
        .def_readonly("final_residual", &PenaltyOutcome::final_residual)
        .def_readonly("objective_value", &PenaltyOutcome::objective_value)
        .def_readonly("outer_iterations", &PenaltyOutcome::outer_iterations)
        .def_readonly("total_inner_iterations", &PenaltyOutcome::total_inner_iterations)
        .def_readonly("violation_history", &PenaltyOutcome::violation_history);

    m.def(
        "penalty_solve",
        [](const ProblemSpec& spec, const PenaltyConfig& config) {
            ControlSequence u0(spec.horizon);
            PenaltyMatrix mu = uniform_penalties(static_cast<int>(spec.obstacles.size()),
                                                 spec.horizon, config.mu0);
            return penalty_solve(spec, mu, u0, config);
        },
        py::arg("spec"), py::arg("config") = PenaltyConfig{});

    py::class_<MissionConfig>(m, "MissionConfig")
        .def(py::init<>())
        .def_readwrite("goal", &MissionConfig::goal)
        .def_readwrite("goal_tolerance", &MissionConfig::goal_tolerance)
        .def_readwrite("max_mpc_steps", &MissionConfig::max_mpc_steps)
        .def_readwrite("lookahead_stages", &MissionConfig::lookahead_stages)
        .def_readwrite("stuck_epsilon", &MissionConfig::stuck_epsilon)
        .def_readwrite("stuck_steps", &MissionConfig::stuck_steps)
        .def_readwrite("grid_resolution", &MissionConfig::grid_resolution)
        .def_readwrite("enable_graph_search", &MissionConfig::enable_graph_search);

    py::class_<MissionLog>(m, "MissionLog")
        .def_property_readonly("status",
                               [](const MissionLog& l) { return to_string(l.status); })
        .def_readonly("closed_loop_cost", &MissionLog::closed_loop_cost)
        .def_readonly("emergency_stops", &MissionLog::emergency_stops)
        .def_readonly("graph_searches", &MissionLog::graph_searches)
        .def_property_readonly("states",
                               [](const MissionLog& l) {
                                   Eigen::MatrixXd out(l.records.size(), 3);
                                   for (std::size_t i = 0; i < l.records.size(); ++i)
                                       out.row(i) = l.records[i].state.vec();
                                   return out;
                               })
        .def_property_readonly("inputs",
                               [](const MissionLog& l) {
                                   Eigen::MatrixXd out(l.records.size(), 2);
                                   for (std::size_t i = 0; i < l.records.size(); ++i)
                                       out.row(i) = l.records[i].input;
                                   return out;
                               })
        .def_property_readonly("max_psi_true", [](const MissionLog& l) {
            std::vector<double> out;
            for (const auto& r : l.records) out.push_back(r.max_psi_true);
            return out;
        });

    py::class_<ScenarioFile>(m, "Scenario")
        .def_readonly("name", &ScenarioFile::name)
        .def_readonly("ts", &ScenarioFile::ts)
        .def_readonly("horizon", &ScenarioFile::horizon)
        .def_readonly("start", &ScenarioFile::start)
        .def_readonly("goal", &ScenarioFile::goal)
        .def_readonly("obstacles", &ScenarioFile::obstacles)
        .def_readonly("solver", &ScenarioFile::solver)
        .def_readonly("mission", &ScenarioFile::mission)
        .def_readonly("defaulted_fields", &ScenarioFile::defaulted_fields)
        .def("make_problem", &ScenarioFile::make_problem);
    m.def("load_scenario", &load_scenario, py::arg("path"));

    m.def(
        "run_mission",
        [](const ScenarioFile& scenario) {
            return run_mission(scenario.make_problem(), scenario.solver, scenario.mission);
        },
        py::arg("scenario"));

    m.def(
        "grid_search",
        [](const ScenarioFile& scenario) {
            OccupancyGrid grid = rasterize(scenario.obstacles, scenario.mission.workspace,
                                           scenario.mission.grid_resolution);
            Eigen::MatrixXi occupancy(grid.height(), grid.width());
            for (int iy = 0; iy < grid.height(); ++iy)
                for (int ix = 0; ix < grid.width(); ++ix)
                    occupancy(iy, ix) = grid.occupied({ix, iy}) ? 1 : 0;
            auto start = grid.nearest_free(grid.cell_of({scenario.start.x, scenario.start.y}), 10);
            auto goal = grid.nearest_free(grid.cell_of({scenario.goal.x, scenario.goal.y}), 10);
            std::vector<std::pair<int, int>> path;
            std::vector<std::pair<double, double>> waypoints;
            if (start && goal) {
                if (auto cells = astar(grid, *start, *goal)) {
                    for (const GridCell& c : *cells) path.emplace_back(c.ix, c.iy);
                    for (const Position& w : extract_waypoints(grid, *cells))
                        waypoints.emplace_back(w.x, w.y);
                }
            }
            return std::make_tuple(occupancy, path, waypoints);
        },
        py::arg("scenario"));
}
