#include "panocnav/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace panocnav {

using nlohmann::json;

ProblemSpec ScenarioFile::make_problem() const {
    ProblemSpec spec;
    spec.model = vehicle;
    spec.ts = ts;
    spec.horizon = horizon;
    spec.weights = weights;
    spec.weights.q_ref = goal;
    spec.obstacles = obstacles;
    spec.input_box = input_bounds;
    spec.q0 = start;
    return spec;
}

namespace {

[[noreturn]] void missing(const std::string& field) {
    throw ScenarioError(ScenarioError::Kind::MissingField,
                        "missing required field '" + field + "'");
}

[[noreturn]] void invalid(const std::string& message) {
    throw ScenarioError(ScenarioError::Kind::Invalid, message);
}

const json& require(const json& obj, const std::string& field, const std::string& path) {
    auto it = obj.find(field);
    if (it == obj.end()) missing(path.empty() ? field : path + "." + field);
    return *it;
}

double require_number(const json& obj, const std::string& field, const std::string& path) {
    const json& v = require(obj, field, path);
    if (!v.is_number()) invalid("field '" + path + "." + field + "' must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) invalid("field '" + path + "." + field + "' must be finite");
    return d;
}

double number_or(const json& obj, const std::string& field, double fallback,
                 std::vector<std::string>& defaulted, const std::string& path) {
    if (!obj.contains(field)) {
        defaulted.push_back(path + "." + field);
        return fallback;
    }
    return require_number(obj, field, path);
}

Eigen::Vector2d read_vec2(const json& v, const std::string& what) {
    if (!v.is_array() || v.size() != 2) invalid("'" + what + "' must be an array of 2 numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

VehicleState read_state(const json& v, const std::string& what) {
    if (!v.is_array() || v.size() != 3)
        invalid("'" + what + "' must be an array [x, y, theta]");
    VehicleState s{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.theta))
        invalid("'" + what + "' must be finite");
    return s;
}

Eigen::Matrix3d read_weight3(const json& v, const std::string& what) {
    if (v.is_array() && v.size() == 3 && v[0].is_number())
        return Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(), v[2].get<double>())
            .asDiagonal();
    if (v.is_array() && v.size() == 3 && v[0].is_array()) {
        Eigen::Matrix3d m;
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_array() || v[i].size() != 3)
                invalid("'" + what + "' rows must have 3 entries");
            for (int j = 0; j < 3; ++j) m(i, j) = v[i][j].get<double>();
        }
        return m;
    }
    invalid("'" + what + "' must be a diagonal [3] or full [3][3] matrix");
}

std::vector<ConstraintExpr> read_constraints(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty())
        invalid("'" + what + "' must be a nonempty array of constraint expressions");
    std::vector<ConstraintExpr> out;
    out.reserve(v.size());
    for (const auto& item : v) {
        if (!item.is_string()) invalid("'" + what + "' entries must be strings");
        try {
            out.push_back(ConstraintExpr::parse(item.get<std::string>()));
        } catch (const ParseError& e) {
            throw ScenarioError(ScenarioError::Kind::Parse,
                                "in '" + what + "': " + e.what() + " in \"" +
                                    item.get<std::string>() + "\"");
        }
    }
    return out;
}

ObstacleSpec read_obstacle(const json& v, std::size_t index,
                           std::vector<std::string>& defaulted) {
    const std::string path = "obstacles[" + std::to_string(index) + "]";
    if (!v.is_object()) invalid("'" + path + "' must be an object");

    ObstacleSpec ob;
    ob.label = v.value("label", "obstacle_" + std::to_string(index));
    ob.true_constraints = read_constraints(require(v, "true", path), path + ".true");

    if (v.contains("enlarged")) {
        ob.constraints = read_constraints(v["enlarged"], path + ".enlarged");
        ob.enlargement = v.value("enlargement", 0.0);
    } else {
        ob.enlargement = number_or(v, "enlargement", 0.1, defaulted, path);
        if (ob.enlargement < 0.0) invalid("'" + path + ".enlargement' must be nonnegative");
        try {
            ob = apply_enlargement(ob);
        } catch (const UnsupportedEnlargement& e) {
            invalid("'" + path + "': " + e.what());
        }
    }
    return ob;
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text, const std::string& name) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line number for the diagnostic
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ScenarioError(ScenarioError::Kind::Parse,
                            name + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!root.is_object())
        throw ScenarioError(ScenarioError::Kind::Parse, name + ": top level must be an object");

    ScenarioFile sc;
    sc.name = root.value("name", name);
    auto& defaulted = sc.defaulted_fields;

    {
        const json& veh = require(root, "vehicle", "");
        const json& kind = require(veh, "kind", "vehicle");
        if (!kind.is_string()) invalid("'vehicle.kind' must be a string");
        VehicleKind k;
        try {
            k = vehicle_kind_from_string(kind.get<std::string>());
        } catch (const std::invalid_argument& e) {
            invalid(e.what());
        }
        double L = require_number(veh, "L", "vehicle");
        if (L <= 0.0) invalid("'vehicle.L' must be positive");
        sc.vehicle = VehicleModel(k, L);
    }

    sc.ts = require_number(root, "ts", "");
    if (sc.ts <= 0.0) invalid("'ts' must be positive");
    {
        const json& n = require(root, "N", "");
        if (!n.is_number_integer() || n.get<int>() < 1)
            invalid("'N' must be a positive integer");
        sc.horizon = n.get<int>();
    }
    {
        const json& b = require(root, "input_bounds", "");
        sc.input_bounds.lower = read_vec2(require(b, "min", "input_bounds"), "input_bounds.min");
        sc.input_bounds.upper = read_vec2(require(b, "max", "input_bounds"), "input_bounds.max");
        try {
            sc.input_bounds.validate();
        } catch (const std::invalid_argument& e) {
            invalid(e.what());
        }
    }

    sc.start = read_state(require(root, "start", ""), "start");
    sc.goal = read_state(require(root, "goal", ""), "goal");

    if (root.contains("weights")) {
        const json& w = root["weights"];
        if (w.contains("Q")) sc.weights.Q = read_weight3(w["Q"], "weights.Q");
        else defaulted.push_back("weights.Q");
        if (w.contains("QN")) sc.weights.QN = read_weight3(w["QN"], "weights.QN");
        else defaulted.push_back("weights.QN");
        if (w.contains("R")) {
            Eigen::Vector2d r = read_vec2(w["R"], "weights.R");
            sc.weights.R = r.asDiagonal();
        } else {
            defaulted.push_back("weights.R");
        }
        if (w.contains("u_ref")) sc.weights.u_ref = read_vec2(w["u_ref"], "weights.u_ref");
    } else {
        defaulted.push_back("weights");
    }
    try {
        sc.weights.validate();
    } catch (const std::invalid_argument& e) {
        invalid(e.what());
    }

    {
        const json& obs = require(root, "obstacles", "");
        if (!obs.is_array()) invalid("'obstacles' must be an array");
        for (std::size_t i = 0; i < obs.size(); ++i)
            sc.obstacles.push_back(read_obstacle(obs[i], i, defaulted));
    }

    {
        json solver = root.value("solver", json::object());
        if (!root.contains("solver")) defaulted.push_back("solver");
        sc.solver.tau_star = number_or(solver, "tau_star", 1e-3, defaulted, "solver");
        sc.solver.eta_star = number_or(solver, "eta_star", 1e-2, defaulted, "solver");
        sc.solver.omega = number_or(solver, "omega", 10.0, defaulted, "solver");
        sc.solver.mu_cap = number_or(solver, "mu_cap", 1e4, defaulted, "solver");
        sc.solver.mu0 = number_or(solver, "mu0", 1.0, defaulted, "solver");
        sc.solver.max_outer_iterations = static_cast<int>(
            number_or(solver, "max_outer_iterations", 20, defaulted, "solver"));
        sc.solver.panoc.lbfgs_memory =
            static_cast<int>(number_or(solver, "lbfgs_memory", 10, defaulted, "solver"));
        sc.solver.panoc.max_iterations = static_cast<int>(
            number_or(solver, "max_inner_iterations", 500, defaulted, "solver"));
        try {
            sc.solver.validate();
        } catch (const std::invalid_argument& e) {
            invalid(e.what());
        }
    }

    {
        const json& mission = require(root, "mission", "");
        const json& ws = require(mission, "workspace", "mission");
        if (!ws.is_array() || ws.size() != 4)
            invalid("'mission.workspace' must be [x_min, y_min, x_max, y_max]");
        sc.mission.workspace = {ws[0].get<double>(), ws[1].get<double>(),
                                ws[2].get<double>(), ws[3].get<double>()};
        if (sc.mission.workspace.empty()) invalid("'mission.workspace' is degenerate");
        sc.mission.goal_tolerance =
            number_or(mission, "goal_tolerance", 0.2, defaulted, "mission");
        sc.mission.max_mpc_steps =
            static_cast<int>(number_or(mission, "max_steps", 500, defaulted, "mission"));
        sc.mission.lookahead_stages =
            static_cast<int>(number_or(mission, "lookahead", 3, defaulted, "mission"));
        sc.mission.stuck_epsilon =
            number_or(mission, "stuck_epsilon", 1e-3, defaulted, "mission");
        sc.mission.stuck_steps =
            static_cast<int>(number_or(mission, "stuck_steps", 2, defaulted, "mission"));
        sc.mission.grid_resolution =
            number_or(mission, "grid_resolution", 0.1, defaulted, "mission");
        sc.mission.planning_clearance =
            number_or(mission, "planning_clearance", 0.0, defaulted, "mission");
        if (sc.mission.planning_clearance < 0.0)
            invalid("'mission.planning_clearance' must be nonnegative");
        if (mission.contains("graph_search"))
            sc.mission.enable_graph_search = mission["graph_search"].get<bool>();
        if (sc.mission.goal_tolerance <= 0.0 || sc.mission.grid_resolution <= 0.0 ||
            sc.mission.stuck_epsilon <= 0.0 || sc.mission.max_mpc_steps < 1 ||
            sc.mission.lookahead_stages < 1 || sc.mission.stuck_steps < 1)
            invalid("'mission' parameters must be positive");
        if (!sc.mission.workspace.contains(sc.start.x, sc.start.y) ||
            !sc.mission.workspace.contains(sc.goal.x, sc.goal.y))
            invalid("'mission.workspace' must contain start and goal");
    }
    sc.mission.goal = sc.goal;

    if (root.contains("seed")) sc.seed = root["seed"].get<unsigned>();
    else defaulted.push_back("seed");

    return sc;
}

ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ScenarioError(ScenarioError::Kind::Io, "cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string stem = path;
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
        stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    return parse_scenario(buffer.str(), stem);
}

}  // namespace panocnav
