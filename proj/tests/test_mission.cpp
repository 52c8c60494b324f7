#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <queue>
#include <random>

#include "panocnav/mission.hpp"
#include "panocnav/scenario.hpp"

using namespace panocnav;

namespace {

std::string scenario_path(const char* name) {
    return std::string(PANOCNAV_SCENARIO_DIR) + "/" + name;
}

// plain Dijkstra on cells, the oracle for A* path costs
std::optional<int> dijkstra_cost(const OccupancyGrid& grid, const GridCell& start,
                                 const GridCell& goal) {
    if (grid.occupied(start) || grid.occupied(goal)) return std::nullopt;
    const int W = grid.width(), H = grid.height();
    std::vector<int> dist(W * H, std::numeric_limits<int>::max());
    auto id = [&](const GridCell& c) { return c.iy * W + c.ix; };
    using Entry = std::pair<int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[id(start)] = 0;
    open.push({0, id(start)});
    const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    while (!open.empty()) {
        auto [d, cell] = open.top();
        open.pop();
        if (d > dist[cell]) continue;
        if (cell == id(goal)) return d;
        GridCell c{cell % W, cell / W};
        for (int k = 0; k < 4; ++k) {
            GridCell n{c.ix + dx[k], c.iy + dy[k]};
            if (!grid.in_bounds(n) || grid.occupied(n)) continue;
            if (d + 1 < dist[id(n)]) {
                dist[id(n)] = d + 1;
                open.push({d + 1, id(n)});
            }
        }
    }
    return std::nullopt;
}

MissionLog log_from_positions(std::initializer_list<std::pair<double, double>> positions) {
    MissionLog log;
    for (auto [x, y] : positions) {
        MissionRecord r;
        r.state = {x, y, 0.0};
        log.records.push_back(r);
    }
    return log;
}

}  // namespace

TEST_CASE("stuck detector") {
    SUBCASE("stationary for two steps") {
        MissionLog log = log_from_positions({{1.0, 1.0}, {1.0, 1.0}});
        CHECK(stuck_detector(log, {1.0, 1.0, 0.3}, 1e-3, 2));
    }
    SUBCASE("steady motion is not stuck") {
        MissionLog log = log_from_positions({{0.0, 0.0}, {0.05, 0.0}});
        CHECK(!stuck_detector(log, {0.10, 0.0, 0.0}, 1e-3, 2));
    }
    SUBCASE("exactly one stationary step then movement") {
        MissionLog log = log_from_positions({{0.0, 0.0}, {0.05, 0.0}});
        CHECK(!stuck_detector(log, {0.05, 0.0, 0.0}, 1e-3, 2));
    }
    SUBCASE("too short a history") {
        MissionLog log = log_from_positions({{0.0, 0.0}});
        CHECK(!stuck_detector(log, {0.0, 0.0, 0.0}, 1e-3, 2));
    }
}

TEST_CASE("rasterize") {
    Rect ws{-2.0, -2.0, 2.0, 2.0};

    SUBCASE("no obstacles leaves every cell free") {
        OccupancyGrid grid = rasterize({}, ws, 0.5);
        for (int iy = 0; iy < grid.height(); ++iy)
            for (int ix = 0; ix < grid.width(); ++ix) CHECK(!grid.occupied({ix, iy}));
    }
    SUBCASE("unit disc occupies exactly the cells whose centers are inside") {
        auto disc = ConstraintExpr::parse("1 - x^2 - y^2");
        std::vector<ObstacleSpec> obstacles{ObstacleSpec::from_pair({disc}, {disc}, "")};
        OccupancyGrid grid = rasterize(obstacles, ws, 0.5);
        GridCell center = grid.cell_of({0.0, 0.0});
        CHECK(grid.occupied(center));
        CHECK(!grid.occupied({0, 0}));                                // corner
        CHECK(!grid.occupied({grid.width() - 1, grid.height() - 1}));  // corner
        // per-cell oracle
        for (int iy = 0; iy < grid.height(); ++iy)
            for (int ix = 0; ix < grid.width(); ++ix) {
                Position z = grid.center({ix, iy});
                bool inside = eval_psi(obstacles[0], z) > 0.0;
                CHECK(grid.occupied({ix, iy}) == inside);
            }
    }
    SUBCASE("degenerate workspace is rejected") {
        CHECK_THROWS_AS(rasterize({}, Rect{0, 0, 0, 1}, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(rasterize({}, ws, 0.0), std::invalid_argument);
    }
}

TEST_CASE("astar basics") {
    Rect ws{0.0, 0.0, 5.0, 5.0};
    OccupancyGrid grid(ws, 1.0);

    SUBCASE("empty grid diagonal costs eight moves") {
        auto path = astar(grid, {0, 0}, {4, 4});
        REQUIRE(path.has_value());
        CHECK(path->size() == 9);  // 8 unit moves
        CHECK(path->front() == GridCell{0, 0});
        CHECK(path->back() == GridCell{4, 4});
    }
    SUBCASE("wall with one gap matches the Dijkstra oracle") {
        for (int iy = 0; iy < 5; ++iy)
            if (iy != 3) grid.set_occupied({2, iy}, true);
        auto path = astar(grid, {0, 0}, {4, 0});
        auto oracle = dijkstra_cost(grid, {0, 0}, {4, 0});
        REQUIRE(path.has_value());
        REQUIRE(oracle.has_value());
        CHECK(static_cast<int>(path->size()) - 1 == *oracle);
    }
    SUBCASE("walled-off goal yields no path") {
        for (int iy = 0; iy < 5; ++iy) grid.set_occupied({3, iy}, true);
        CHECK(!astar(grid, {0, 0}, {4, 0}).has_value());
    }
    SUBCASE("occupied endpoints yield no path") {
        grid.set_occupied({0, 0}, true);
        CHECK(!astar(grid, {0, 0}, {4, 4}).has_value());
    }
}

TEST_CASE("astar equals Dijkstra on random occupancy grids") {
    std::mt19937 rng(12345);
    std::bernoulli_distribution occupied(0.3);
    int with_path = 0, without_path = 0;
    for (int trial = 0; trial < 100; ++trial) {
        OccupancyGrid grid(Rect{0.0, 0.0, 20.0, 20.0}, 1.0);
        for (int iy = 0; iy < grid.height(); ++iy)
            for (int ix = 0; ix < grid.width(); ++ix)
                grid.set_occupied({ix, iy}, occupied(rng));
        grid.set_occupied({0, 0}, false);
        grid.set_occupied({19, 19}, false);

        auto path = astar(grid, {0, 0}, {19, 19});
        auto oracle = dijkstra_cost(grid, {0, 0}, {19, 19});
        CHECK(path.has_value() == oracle.has_value());
        if (path && oracle) {
            CHECK(static_cast<int>(path->size()) - 1 == *oracle);
            ++with_path;
        } else {
            ++without_path;
        }
    }
    CHECK(with_path > 10);
    CHECK(without_path > 10);
}

TEST_CASE("extract_waypoints") {
    OccupancyGrid grid(Rect{0.0, 0.0, 10.0, 10.0}, 1.0);

    SUBCASE("straight path has none") {
        std::vector<GridCell> path{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
        CHECK(extract_waypoints(grid, path).empty());
    }
    SUBCASE("single corner emits the corner cell center") {
        std::vector<GridCell> path{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}};
        auto wps = extract_waypoints(grid, path);
        REQUIRE(wps.size() == 1);
        Position corner = grid.center({2, 0});
        CHECK(wps[0].x == corner.x);
        CHECK(wps[0].y == corner.y);
    }
    SUBCASE("waypoint count equals the number of direction changes") {
        std::vector<GridCell> path{{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {2, 3}, {3, 3}};
        CHECK(extract_waypoints(grid, path).size() == 4);
    }
    SUBCASE("two-rectangle scene forces exactly two direction changes") {
        // start and goal aligned so the turn-minimal route is over one block
        // and back down past the second
        OccupancyGrid scene(Rect{0.0, 0.0, 20.0, 10.0}, 1.0);
        for (int ix = 6; ix <= 8; ++ix)
            for (int iy = 0; iy <= 5; ++iy) scene.set_occupied({ix, iy}, true);
        for (int ix = 12; ix <= 14; ++ix)
            for (int iy = 0; iy <= 5; ++iy) scene.set_occupied({ix, iy}, true);
        auto path = astar(scene, {2, 2}, {17, 2});
        REQUIRE(path.has_value());
        auto wps = extract_waypoints(scene, *path);
        CHECK(wps.size() == 2);
    }
}

TEST_CASE("emergency stop check") {
    ProblemSpec spec;
    spec.model = VehicleModel(VehicleKind::Trailer, 0.5);
    spec.ts = 0.1;
    spec.horizon = 6;
    auto disc = ConstraintExpr::parse("1 - x^2 - y^2");
    spec.obstacles.push_back(ObstacleSpec::from_pair({disc}, {disc}, "disc"));
    spec.weights.Q = Eigen::Vector3d(0.05, 0.05, 0.005).asDiagonal();
    spec.weights.R = Eigen::Vector2d(0.01, 0.01).asDiagonal();
    spec.input_box.lower = {-4.0, -4.0};
    spec.input_box.upper = {4.0, 4.0};

    auto outcome_with_plan = [&](const ControlSequence& u) {
        PenaltyOutcome out;
        out.controls = u;
        return out;
    };

    SUBCASE("feasible plan does not stop") {
        spec.q0 = {5.0, 5.0, 0.0};
        ControlSequence u(6);
        CHECK(!emergency_stop_check(outcome_with_plan(u), spec, 1e-2, 3));
    }
    SUBCASE("violation inside the window stops") {
        // trailer at theta 0 translates exactly; stage 2 lands at the disc edge
        spec.q0 = {-1.05, 0.0, 0.0};
        ControlSequence u(6);
        for (int k = 0; k < 6; ++k) u.set_input(k, {4.0, 0.0});
        // stages: -0.65, -0.25, 0.15, ... -> psi(stage 2) = 1 - 0.0625 > eta
        CHECK(emergency_stop_check(outcome_with_plan(u), spec, 1e-2, 3));
    }
    SUBCASE("violation beyond the lookahead window does not stop") {
        spec.q0 = {-2.3, 0.0, 0.0};
        ControlSequence u(6);
        for (int k = 0; k < 6; ++k) u.set_input(k, {4.0, 0.0});
        // first stage inside the disc is stage 4 at x = -0.7
        CHECK(!emergency_stop_check(outcome_with_plan(u), spec, 1e-2, 3));
        CHECK(emergency_stop_check(outcome_with_plan(u), spec, 1e-2, 4));
    }
}

TEST_CASE("stop input freezes both models exactly") {
    VehicleModel trailer(VehicleKind::Trailer, 0.5);
    VehicleModel bicycle(VehicleKind::Bicycle, 1.0);

    ControlInput planned{2.5, 0.6};
    ControlInput trailer_stop = stop_input(trailer, planned);
    CHECK(trailer_stop == ControlInput(0.0, 0.0));
    ControlInput bicycle_stop = stop_input(bicycle, planned);
    CHECK(bicycle_stop == ControlInput(0.0, 0.6));  // keeps the steering angle

    VehicleState q{0.4, -0.2, 1.1};
    VehicleState ft = rk4_step(trailer, q, trailer_stop, 0.05);
    CHECK(ft.x == q.x);
    CHECK(ft.y == q.y);
    CHECK(ft.theta == q.theta);
    VehicleState fb = rk4_step(bicycle, q, bicycle_stop, 0.05);
    CHECK(fb.x == q.x);
    CHECK(fb.y == q.y);
    CHECK(fb.theta == q.theta);
}

TEST_CASE("mpc_step at the goal is a fixed point") {
    ProblemSpec spec;
    spec.model = VehicleModel(VehicleKind::Bicycle, 1.0);
    spec.ts = 0.05;
    spec.horizon = 10;
    spec.q0 = {2.0, 1.0, 0.4};
    spec.weights.q_ref = spec.q0;
    spec.weights.u_ref = {0.0, 0.0};
    spec.input_box.lower = {-0.1, -1.0};
    spec.input_box.upper = {4.0, 1.0};

    PenaltyConfig config;
    ControlSequence u_warm(10);
    PenaltyMatrix mu_warm(0, 10);
    MpcStepResult step = mpc_step(spec, mu_warm, u_warm, config);
    CHECK(step.applied.lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(std::abs(step.next_state.x - spec.q0.x) <= 1e-9);
    CHECK(std::abs(step.next_state.y - spec.q0.y) <= 1e-9);
    // plant step is exactly the integrator step
    VehicleState expected = rk4_step(spec.model, spec.q0, step.applied, spec.ts);
    CHECK(step.next_state.x == expected.x);
    CHECK(step.next_state.y == expected.y);
    CHECK(step.next_state.theta == expected.theta);
    // warm starts come back shifted
    CHECK(step.shifted_controls.horizon() == 10);
    CHECK(step.shifted_mu.cols() == 10);
}

TEST_CASE("obstacle-free mission reaches the goal without heuristics") {
    ProblemSpec spec;
    spec.model = VehicleModel(VehicleKind::Trailer, 0.5);
    spec.ts = 0.05;
    spec.horizon = 20;
    spec.q0 = {0.0, 0.0, 0.0};
    spec.weights.Q = Eigen::Vector3d(0.05, 0.05, 0.005).asDiagonal();
    spec.weights.R = Eigen::Vector2d(0.01, 0.01).asDiagonal();
    spec.weights.QN = Eigen::Vector3d(0.5, 0.5, 0.05).asDiagonal();
    spec.input_box.lower = {-4.0, -4.0};
    spec.input_box.upper = {4.0, 4.0};

    PenaltyConfig penalty;
    MissionConfig mission;
    mission.goal = {2.0, 1.0, 0.0};
    mission.max_mpc_steps = 200;
    mission.workspace = {-1.0, -1.0, 3.0, 2.0};

    MissionLog log = run_mission(spec, penalty, mission);
    CHECK(log.status == MissionStatus::Reached);
    CHECK(log.emergency_stops == 0);
    CHECK(log.graph_searches == 0);
    CHECK(log.waypoints.empty());
    CHECK(log.records.size() <= 201);
    const VehicleState& final_state = log.records.back().state;
    CHECK(std::hypot(final_state.x - 2.0, final_state.y - 1.0) <= mission.goal_tolerance);
    CHECK(log.fbe_descent_violations == 0);
}

TEST_CASE("one crescent step advances toward the goal and logs it") {
    ScenarioFile sc = load_scenario(scenario_path("crescent.scn"));
    ProblemSpec spec = sc.make_problem();
    MissionConfig mission = sc.mission;
    mission.max_mpc_steps = 1;
    MissionLog log = run_mission(spec, sc.solver, mission);
    REQUIRE(log.records.size() == 2);  // one executed step + terminal record
    double before = std::hypot(sc.start.x - sc.goal.x, sc.start.y - sc.goal.y);
    const VehicleState& next = log.records.back().state;
    double after = std::hypot(next.x - sc.goal.x, next.y - sc.goal.y);
    CHECK(after < before);
    CHECK(!log.records[0].stop_flag);
    CHECK(log.records[0].active_waypoint == -1);
    CHECK(log.records[0].inner_iterations > 0);
}

TEST_CASE("mission log length respects the step budget") {
    ProblemSpec spec;
    spec.model = VehicleModel(VehicleKind::Trailer, 0.5);
    spec.ts = 0.05;
    spec.horizon = 8;
    spec.q0 = {0.0, 0.0, 0.0};
    spec.input_box.lower = {-4.0, -4.0};
    spec.input_box.upper = {4.0, 4.0};
    PenaltyConfig penalty;
    MissionConfig mission;
    mission.goal = {40.0, 0.0, 0.0};  // unreachable in the budget
    mission.max_mpc_steps = 15;
    mission.workspace = {-1.0, -1.0, 45.0, 1.0};
    MissionLog log = run_mission(spec, penalty, mission);
    CHECK(log.status == MissionStatus::MaxSteps);
    CHECK(log.records.size() <= 16);
}

TEST_CASE("a walled-off goal fails the mission with a no-path status") {
    ProblemSpec spec;
    spec.model = VehicleModel(VehicleKind::Trailer, 0.5);
    spec.ts = 0.05;
    spec.horizon = 20;
    spec.q0 = {0.0, 0.1, 0.0};
    spec.weights.Q = Eigen::Vector3d(0.05, 0.05, 0.005).asDiagonal();
    spec.weights.R = Eigen::Vector2d(0.01, 0.01).asDiagonal();
    spec.weights.QN = Eigen::Vector3d(0.5, 0.5, 0.05).asDiagonal();
    spec.input_box.lower = {-4.0, -4.0};
    spec.input_box.upper = {4.0, 4.0};
    // a thick ring around the goal, as four overlapping slabs
    auto slab = [](double x0, double y0, double x1, double y1) {
        std::vector<ConstraintExpr> h{
            ConstraintExpr::parse("x - " + std::to_string(x0)),
            ConstraintExpr::parse(std::to_string(x1) + " - x"),
            ConstraintExpr::parse("y - " + std::to_string(y0)),
            ConstraintExpr::parse(std::to_string(y1) + " - y")};
        return ObstacleSpec::from_pair(h, h, "slab");
    };
    spec.obstacles = {slab(2.0, -2.0, 6.0, -0.8), slab(2.0, 0.8, 6.0, 2.0),
                      slab(2.0, -2.0, 3.2, 2.0), slab(4.8, -2.0, 6.0, 2.0)};

    PenaltyConfig penalty;
    MissionConfig mission;
    mission.goal = {4.0, 0.0, 0.0};  // inside the ring
    mission.max_mpc_steps = 300;
    mission.workspace = {-1.0, -3.0, 7.0, 3.0};
    MissionLog log = run_mission(spec, penalty, mission);
    CHECK(log.status == MissionStatus::NoPath);
    CHECK(!log.records.empty());
}

TEST_CASE("grid dilation grows occupancy and never frees cells") {
    auto disc = ConstraintExpr::parse("0.25 - x^2 - y^2");
    std::vector<ObstacleSpec> obstacles{ObstacleSpec::from_pair({disc}, {disc}, "")};
    OccupancyGrid grid = rasterize(obstacles, Rect{-2, -2, 2, 2}, 0.25);
    OccupancyGrid dilated = grid;
    dilated.dilate(2);
    int before = 0, after = 0;
    for (int iy = 0; iy < grid.height(); ++iy)
        for (int ix = 0; ix < grid.width(); ++ix) {
            before += grid.occupied({ix, iy});
            after += dilated.occupied({ix, iy});
            if (grid.occupied({ix, iy})) CHECK(dilated.occupied({ix, iy}));
        }
    CHECK(after > before);
}
