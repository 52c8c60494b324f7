#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panocnav/penalty.hpp"

namespace panocnav {

struct Rect {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    bool empty() const { return x_max <= x_min || y_max <= y_min; }
};

struct MissionConfig {
    VehicleState goal;
    double goal_tolerance = 0.2;   // also the waypoint-reached radius
    int max_mpc_steps = 500;
    int lookahead_stages = 3;      // emergency-stop window
    double stuck_epsilon = 1e-3;   // position displacement threshold
    int stuck_steps = 2;
    double grid_resolution = 0.1;
    double planning_clearance = 0.0;  // extra grid dilation for A* only (m)
    Rect workspace;
    bool enable_graph_search = true;
};

struct GridCell {
    int ix = 0;
    int iy = 0;
    bool operator==(const GridCell&) const = default;
};

class OccupancyGrid {
public:
    OccupancyGrid(const Rect& workspace, double resolution);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return cell_; }

    bool in_bounds(const GridCell& c) const {
        return c.ix >= 0 && c.ix < width_ && c.iy >= 0 && c.iy < height_;
    }
    bool occupied(const GridCell& c) const { return occ_[index(c)]; }
    void set_occupied(const GridCell& c, bool value) { occ_[index(c)] = value; }

    Position center(const GridCell& c) const {
        return {origin_x_ + (c.ix + 0.5) * cell_, origin_y_ + (c.iy + 0.5) * cell_};
    }
    /// Cell containing a position, clamped to the grid bounds.
    GridCell cell_of(const Position& p) const;

    /// Nearest free cell by ring search around `c`; nullopt if none exists
    /// within `max_radius` rings.
    std::optional<GridCell> nearest_free(const GridCell& c, int max_radius) const;

    /// Grows every occupied region by `cells` (Chebyshev radius). Used to
    /// keep planned paths clear of the obstacle boundary.
    void dilate(int cells);

private:
    std::size_t index(const GridCell& c) const {
        return static_cast<std::size_t>(c.iy) * width_ + c.ix;
    }
    double origin_x_, origin_y_, cell_;
    int width_, height_;
    std::vector<uint8_t> occ_;
};

/// Marks every cell whose center lies strictly inside some enlarged obstacle.
OccupancyGrid rasterize(const std::vector<ObstacleSpec>& obstacles, const Rect& workspace,
                        double resolution);

/// 4-connected shortest path with unit edge costs under the Euclidean
/// heuristic; among shortest paths, one with the fewest direction changes is
/// returned. nullopt when no path exists (or an endpoint is blocked).
std::optional<std::vector<GridCell>> astar(const OccupancyGrid& grid, const GridCell& start,
                                           const GridCell& goal);

/// Cell-center positions at which the path switches between left-right and
/// up-down movement; start and goal are never included.
std::vector<Position> extract_waypoints(const OccupancyGrid& grid,
                                        const std::vector<GridCell>& path);

enum class MissionStatus { Reached, MaxSteps, NoPath };

std::string to_string(MissionStatus status);

struct MissionRecord {
    VehicleState state;          // state before this step's input is applied
    ControlInput input = ControlInput::Zero();
    bool stop_flag = false;
    int active_waypoint = -1;    // -1 when tracking the true goal
    double max_psi_true = 0.0;   // over obstacles, at this record's state
    double max_psi_enlarged = 0.0;
    long inner_iterations = 0;
    int outer_iterations = 0;
    std::string solver_status;
    double solve_time_ms = 0.0;
};

struct MissionLog {
    std::vector<MissionRecord> records;  // one per executed step + terminal record
    MissionStatus status = MissionStatus::MaxSteps;
    double closed_loop_cost = 0.0;
    long fbe_descent_violations = 0;
    std::vector<Position> waypoints;     // all waypoints generated during the run
    int emergency_stops = 0;
    int graph_searches = 0;
};

struct MpcStepResult {
    ControlInput applied;
    VehicleState next_state;
    PenaltyOutcome outcome;
    ControlSequence shifted_controls;
    PenaltyMatrix shifted_mu;
};

/// One receding-horizon step: penalty solve from spec.q0, apply the first
/// input through the simulation plant (the model itself), and produce
/// shifted warm starts for the next step.
MpcStepResult mpc_step(const ProblemSpec& spec, const PenaltyMatrix& mu_warm,
                       const ControlSequence& u_warm, const PenaltyConfig& config);

/// True when the predicted obstacle cost exceeds eta_star within the next
/// `lookahead` stages.
bool emergency_stop_check(const PenaltyOutcome& outcome, const ProblemSpec& spec,
                          double eta_star, int lookahead);

/// Zero-velocity input that freezes the (driftless) vehicle exactly.
ControlInput stop_input(const VehicleModel& model, const ControlInput& planned);

/// True when the position displacement over each of the last `steps` executed
/// steps is below eps. Needs at least steps+1 recorded states.
bool stuck_detector(const MissionLog& log, const VehicleState& current, double eps,
                    int steps);

/// Closed-loop mission driver: loops mpc_step; performs an emergency stop on
/// predicted violations; when stuck, extracts intermediate destinations from
/// an A* grid search and visits them before restoring the true goal.
MissionLog run_mission(const ProblemSpec& base_spec, const PenaltyConfig& penalty_config,
                       const MissionConfig& mission_config);

}  // namespace panocnav
