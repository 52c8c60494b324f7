#include "panocnav/mission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace panocnav {

OccupancyGrid::OccupancyGrid(const Rect& workspace, double resolution) {
    if (workspace.empty()) throw std::invalid_argument("degenerate workspace rectangle");
    if (resolution <= 0.0) throw std::invalid_argument("grid resolution must be positive");
    origin_x_ = workspace.x_min;
    origin_y_ = workspace.y_min;
    cell_ = resolution;
    width_ = std::max(1, static_cast<int>(std::ceil((workspace.x_max - workspace.x_min) / resolution)));
    height_ = std::max(1, static_cast<int>(std::ceil((workspace.y_max - workspace.y_min) / resolution)));
    occ_.assign(static_cast<std::size_t>(width_) * height_, 0);
}

GridCell OccupancyGrid::cell_of(const Position& p) const {
    int ix = static_cast<int>(std::floor((p.x - origin_x_) / cell_));
    int iy = static_cast<int>(std::floor((p.y - origin_y_) / cell_));
    ix = std::clamp(ix, 0, width_ - 1);
    iy = std::clamp(iy, 0, height_ - 1);
    return {ix, iy};
}

std::optional<GridCell> OccupancyGrid::nearest_free(const GridCell& c, int max_radius) const {
    if (in_bounds(c) && !occupied(c)) return c;
    for (int radius = 1; radius <= max_radius; ++radius) {
        GridCell best;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int dx = -radius; dx <= radius; ++dx)
            for (int dy = -radius; dy <= radius; ++dy) {
                if (std::max(std::abs(dx), std::abs(dy)) != radius) continue;
                GridCell cand{c.ix + dx, c.iy + dy};
                if (!in_bounds(cand) || occupied(cand)) continue;
                double d = std::hypot(static_cast<double>(dx), static_cast<double>(dy));
                if (d < best_dist) {
                    best_dist = d;
                    best = cand;
                }
            }
        if (best_dist < std::numeric_limits<double>::infinity()) return best;
    }
    return std::nullopt;
}

void OccupancyGrid::dilate(int cells) {
    if (cells <= 0) return;
    std::vector<uint8_t> grown = occ_;
    for (int iy = 0; iy < height_; ++iy)
        for (int ix = 0; ix < width_; ++ix) {
            if (!occ_[index({ix, iy})]) continue;
            for (int dy = -cells; dy <= cells; ++dy)
                for (int dx = -cells; dx <= cells; ++dx) {
                    GridCell c{ix + dx, iy + dy};
                    if (in_bounds(c)) grown[index(c)] = 1;
                }
        }
    occ_ = std::move(grown);
}

OccupancyGrid rasterize(const std::vector<ObstacleSpec>& obstacles, const Rect& workspace,
                        double resolution) {
    OccupancyGrid grid(workspace, resolution);
    for (int iy = 0; iy < grid.height(); ++iy)
        for (int ix = 0; ix < grid.width(); ++ix) {
            GridCell c{ix, iy};
            Position z = grid.center(c);
            for (const auto& ob : obstacles) {
                if (eval_psi(ob, z) > 0.0) {
                    grid.set_occupied(c, true);
                    break;
                }
            }
        }
    return grid;
}

// ---------------------------------------------------------------------------
// A* with lexicographic (length, turns) cost so ties resolve to paths with
// the fewest direction changes; turn minimization keeps the waypoint list
// short and never affects the path length.
// ---------------------------------------------------------------------------

namespace {

constexpr int kDirs = 4;
constexpr int dx_of[kDirs] = {1, -1, 0, 0};
constexpr int dy_of[kDirs] = {0, 0, 1, -1};

struct NodeKey {
    int cell;  // iy * width + ix
    int dir;   // incoming direction, kDirs for the start
};

}  // namespace

std::optional<std::vector<GridCell>> astar(const OccupancyGrid& grid, const GridCell& start,
                                           const GridCell& goal) {
    if (!grid.in_bounds(start) || !grid.in_bounds(goal)) return std::nullopt;
    if (grid.occupied(start) || grid.occupied(goal)) return std::nullopt;

    const int W = grid.width(), H = grid.height();
    const int cells = W * H;
    const int states = cells * (kDirs + 1);
    auto state_id = [&](int cell, int dir) { return cell * (kDirs + 1) + dir; };
    auto cell_id = [&](const GridCell& c) { return c.iy * W + c.ix; };

    auto heuristic = [&](int cell) {
        int ix = cell % W, iy = cell / W;
        return std::hypot(static_cast<double>(ix - goal.ix),
                          static_cast<double>(iy - goal.iy));
    };

    std::vector<int> g_len(states, std::numeric_limits<int>::max());
    std::vector<int> g_turns(states, std::numeric_limits<int>::max());
    std::vector<int> parent(states, -1);

    struct QueueEntry {
        double f;
        int turns;
        int state;
        bool operator>(const QueueEntry& o) const {
            if (f != o.f) return f > o.f;
            if (turns != o.turns) return turns > o.turns;
            return state > o.state;
        }
    };
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;

    const int start_state = state_id(cell_id(start), kDirs);
    g_len[start_state] = 0;
    g_turns[start_state] = 0;
    open.push({heuristic(cell_id(start)), 0, start_state});

    const int goal_cell = cell_id(goal);
    int goal_state = -1;

    while (!open.empty()) {
        QueueEntry top = open.top();
        open.pop();
        const int state = top.state;
        const int cell = state / (kDirs + 1);
        const int dir = state % (kDirs + 1);
        double f_here = g_len[state] + heuristic(cell);
        if (top.f > f_here || (top.f == f_here && top.turns > g_turns[state]))
            continue;  // stale entry
        if (cell == goal_cell) {
            goal_state = state;
            break;
        }
        const int ix = cell % W, iy = cell / W;
        for (int nd = 0; nd < kDirs; ++nd) {
            GridCell next{ix + dx_of[nd], iy + dy_of[nd]};
            if (!grid.in_bounds(next) || grid.occupied(next)) continue;
            int next_state = state_id(cell_id(next), nd);
            int len = g_len[state] + 1;
            int turns = g_turns[state] + ((dir != kDirs && dir != nd) ? 1 : 0);
            if (len < g_len[next_state] ||
                (len == g_len[next_state] && turns < g_turns[next_state])) {
                g_len[next_state] = len;
                g_turns[next_state] = turns;
                parent[next_state] = state;
                open.push({len + heuristic(cell_id(next)), turns, next_state});
            }
        }
    }

    if (goal_state < 0) return std::nullopt;

    std::vector<GridCell> path;
    for (int state = goal_state; state >= 0; state = parent[state]) {
        int cell = state / (kDirs + 1);
        path.push_back({cell % W, cell / W});
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<Position> extract_waypoints(const OccupancyGrid& grid,
                                        const std::vector<GridCell>& path) {
    std::vector<Position> waypoints;
    if (path.size() < 3) return waypoints;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        int dx_prev = path[i].ix - path[i - 1].ix;
        int dy_prev = path[i].iy - path[i - 1].iy;
        int dx_next = path[i + 1].ix - path[i].ix;
        int dy_next = path[i + 1].iy - path[i].iy;
        if (dx_prev != dx_next || dy_prev != dy_next)
            waypoints.push_back(grid.center(path[i]));
    }
    return waypoints;
}

// ---------------------------------------------------------------------------
// Closed-loop driver
// ---------------------------------------------------------------------------

std::string to_string(MissionStatus status) {
    switch (status) {
        case MissionStatus::Reached: return "reached";
        case MissionStatus::MaxSteps: return "max_steps";
        case MissionStatus::NoPath: return "no_path";
    }
    return "unknown";
}

MpcStepResult mpc_step(const ProblemSpec& spec, const PenaltyMatrix& mu_warm,
                       const ControlSequence& u_warm, const PenaltyConfig& config) {
    MpcStepResult result;
    result.outcome = penalty_solve(spec, mu_warm, u_warm, config);
    result.applied = result.outcome.controls.input(0);
    result.next_state = rk4_step(spec.model, spec.q0, result.applied, spec.ts);
    auto shifted = shift_warm_start(result.outcome.controls, result.outcome.mu);
    result.shifted_controls = std::move(shifted.first);
    result.shifted_mu = std::move(shifted.second);
    return result;
}

bool emergency_stop_check(const PenaltyOutcome& outcome, const ProblemSpec& spec,
                          double eta_star, int lookahead) {
    ViolationReport violation = max_obstacle_violation(spec, outcome.controls);
    const int stages = std::min<int>(lookahead, static_cast<int>(violation.per_stage.size()));
    for (int k = 0; k < stages; ++k)
        if (violation.per_stage[k] > eta_star) return true;
    return false;
}

ControlInput stop_input(const VehicleModel& model, const ControlInput& planned) {
    if (model.kind == VehicleKind::Bicycle) return {0.0, planned[1]};
    return ControlInput::Zero();
}

bool stuck_detector(const MissionLog& log, const VehicleState& current, double eps,
                    int steps) {
    const auto& records = log.records;
    if (static_cast<int>(records.size()) < steps) return false;
    VehicleState later = current;
    for (int i = 0; i < steps; ++i) {
        const VehicleState& earlier = records[records.size() - 1 - i].state;
        double displacement = std::hypot(later.x - earlier.x, later.y - earlier.y);
        if (displacement >= eps) return false;
        later = earlier;
    }
    return true;
}

namespace {

double stage_cost(const CostWeights& w, const VehicleState& goal_ref,
                  const VehicleState& q, const ControlInput& u) {
    Eigen::Vector3d dq = q.vec() - goal_ref.vec();
    Eigen::Vector2d du = u - w.u_ref;
    return dq.dot(w.Q * dq) + du.dot(w.R * du);
}

}  // namespace

MissionLog run_mission(const ProblemSpec& base_spec, const PenaltyConfig& penalty_config,
                       const MissionConfig& mission_config) {
    base_spec.validate();
    penalty_config.validate();
    if (mission_config.workspace.empty())
        throw std::invalid_argument("mission workspace is empty");

    MissionLog log;
    const int N = base_spec.horizon;
    const int num_obstacles = static_cast<int>(base_spec.obstacles.size());

    VehicleState state = base_spec.q0;
    ControlSequence u_warm(N);
    PenaltyMatrix mu_warm = uniform_penalties(num_obstacles, N, penalty_config.mu0);

    std::vector<Position> pending_waypoints;
    int waypoint_cursor = -1;

    // A target switch makes the previous plan and its escalated penalty
    // factors stale; restarting the penalty homotopy from mu0 restores the
    // local-minimum escape that gradual penalty growth provides. The tiny
    // alternating seed breaks the zero-input saddle that nonholonomic models
    // sit on when the target displacement is orthogonal to the heading.
    auto reset_warm_start = [&]() {
        u_warm = ControlSequence(N);
        for (int k = 0; k < 2 * N; ++k)
            u_warm.stacked()[k] = (k % 4 < 2) ? 1e-3 : -1e-3;
        mu_warm = uniform_penalties(num_obstacles, N, penalty_config.mu0);
    };

    auto target_state = [&]() -> VehicleState {
        if (waypoint_cursor >= 0 && waypoint_cursor < static_cast<int>(pending_waypoints.size())) {
            const Position& wp = pending_waypoints[waypoint_cursor];
            return {wp.x, wp.y, mission_config.goal.theta};
        }
        return mission_config.goal;
    };
    auto distance_to = [&](const VehicleState& a, const VehicleState& b) {
        return std::hypot(a.x - b.x, a.y - b.y);
    };

    for (int step = 0; step < mission_config.max_mpc_steps; ++step) {
        if (distance_to(state, mission_config.goal) <= mission_config.goal_tolerance) {
            log.status = MissionStatus::Reached;
            break;
        }

        ProblemSpec spec = base_spec;
        spec.q0 = state;
        spec.weights.q_ref = target_state();

        MpcStepResult mpc = mpc_step(spec, mu_warm, u_warm, penalty_config);
        log.fbe_descent_violations += mpc.outcome.fbe_descent_violations;

        bool stop = emergency_stop_check(mpc.outcome, spec, penalty_config.eta_star,
                                         mission_config.lookahead_stages);

        MissionRecord record;
        record.state = state;
        record.stop_flag = stop;
        record.active_waypoint = waypoint_cursor;
        record.inner_iterations = mpc.outcome.total_inner_iterations;
        record.outer_iterations = mpc.outcome.outer_iterations;
        record.solver_status = to_string(mpc.outcome.status);
        record.solve_time_ms = mpc.outcome.solve_time_ms;
        for (const auto& ob : base_spec.obstacles) {
            Position z{state.x, state.y};
            record.max_psi_enlarged = std::max(record.max_psi_enlarged, eval_psi(ob, z));
            record.max_psi_true = std::max(record.max_psi_true, eval_psi_true(ob, z));
        }

        VehicleState next;
        if (stop) {
            ++log.emergency_stops;
            record.input = stop_input(spec.model, mpc.applied);
            next = rk4_step(spec.model, state, record.input, spec.ts);
            // The state does not move, so the unshifted plan warm-starts the
            // identical problem at the next step.
            u_warm = mpc.outcome.controls;
            mu_warm = mpc.outcome.mu;
        } else {
            record.input = mpc.applied;
            next = mpc.next_state;
            u_warm = std::move(mpc.shifted_controls);
            mu_warm = std::move(mpc.shifted_mu);
        }

        log.closed_loop_cost +=
            stage_cost(base_spec.weights, mission_config.goal, state, record.input);
        log.records.push_back(std::move(record));
        state = next;

        // Waypoint bookkeeping: advance when the active one is reached,
        // restore the true goal once the list is exhausted.
        if (waypoint_cursor >= 0) {
            const Position& wp = pending_waypoints[waypoint_cursor];
            if (std::hypot(state.x - wp.x, state.y - wp.y) <= mission_config.goal_tolerance) {
                ++waypoint_cursor;
                if (waypoint_cursor >= static_cast<int>(pending_waypoints.size()))
                    waypoint_cursor = -1;
                reset_warm_start();
            }
        }

        if (mission_config.enable_graph_search && waypoint_cursor < 0 &&
            stuck_detector(log, state, mission_config.stuck_epsilon,
                           mission_config.stuck_steps)) {
            ++log.graph_searches;
            OccupancyGrid grid = rasterize(base_spec.obstacles, mission_config.workspace,
                                           mission_config.grid_resolution);
            grid.dilate(static_cast<int>(std::lround(mission_config.planning_clearance /
                                                     mission_config.grid_resolution)));
            auto start_cell = grid.nearest_free(grid.cell_of({state.x, state.y}), 10);
            auto goal_cell = grid.nearest_free(
                grid.cell_of({mission_config.goal.x, mission_config.goal.y}), 10);
            std::optional<std::vector<GridCell>> path;
            if (start_cell && goal_cell) path = astar(grid, *start_cell, *goal_cell);
            if (!path) {
                log.status = MissionStatus::NoPath;
                break;
            }
            pending_waypoints = extract_waypoints(grid, *path);
            // waypoints that already lie within the arrival radius of the
            // goal add nothing over the final goal restore
            std::erase_if(pending_waypoints, [&](const Position& wp) {
                return std::hypot(wp.x - mission_config.goal.x,
                                  wp.y - mission_config.goal.y) <=
                       mission_config.goal_tolerance;
            });
            log.waypoints.insert(log.waypoints.end(), pending_waypoints.begin(),
                                 pending_waypoints.end());
            waypoint_cursor = pending_waypoints.empty() ? -1 : 0;
            reset_warm_start();
        }
    }

    if (log.status == MissionStatus::MaxSteps &&
        distance_to(state, mission_config.goal) <= mission_config.goal_tolerance)
        log.status = MissionStatus::Reached;

    // Terminal record so the log always ends with the final state.
    MissionRecord terminal;
    terminal.state = state;
    terminal.active_waypoint = waypoint_cursor;
    for (const auto& ob : base_spec.obstacles) {
        Position z{state.x, state.y};
        terminal.max_psi_enlarged = std::max(terminal.max_psi_enlarged, eval_psi(ob, z));
        terminal.max_psi_true = std::max(terminal.max_psi_true, eval_psi_true(ob, z));
    }
    log.records.push_back(std::move(terminal));
    return log;
}

}  // namespace panocnav
