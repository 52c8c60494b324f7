#pragma once

#include <string>
#include <vector>

#include "panocnav/mission.hpp"

namespace panocnav {

/// Scenario file problems, with a distinct kind per diagnostic class.
class ScenarioError : public std::runtime_error {
public:
    enum class Kind { Io, Parse, MissingField, Invalid };

    ScenarioError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// A fully validated scenario: vehicle, horizon, costs, obstacle sets,
/// solver and mission parameters. Defaults applied by the loader are listed
/// in `defaulted_fields`.
struct ScenarioFile {
    std::string name;
    VehicleModel vehicle;
    double ts = 0.05;
    int horizon = 50;
    InputBox input_bounds;
    CostWeights weights;
    VehicleState start;
    VehicleState goal;
    std::vector<ObstacleSpec> obstacles;
    PenaltyConfig solver;
    MissionConfig mission;
    unsigned seed = 1;
    std::vector<std::string> defaulted_fields;

    ProblemSpec make_problem() const;
};

/// Loads and validates a scenario file (JSON). Throws ScenarioError with a
/// distinct kind for I/O failures, malformed JSON (with line number),
/// missing fields (naming the field) and invariant violations.
ScenarioFile load_scenario(const std::string& path);
ScenarioFile parse_scenario(const std::string& text, const std::string& name = "scenario");

/// One row of the trajectory table written by `simulate`.
struct TrajectoryRow {
    long step = 0;
    double time_s = 0.0;
    double x = 0.0, y = 0.0, theta = 0.0;
    double u0 = 0.0, u1 = 0.0;
    double max_psi_true = 0.0;
    double max_psi_enlarged = 0.0;
    long inner_iterations = 0;
    long outer_iterations = 0;
    double solve_time_ms = 0.0;
    int stop_flag = 0;
    long active_waypoint = -1;
};

struct TrajectoryLog {
    std::vector<TrajectoryRow> rows;

    static TrajectoryLog from_mission(const MissionLog& mission, double ts);
};

/// The fixed CSV header; read_trajectory rejects files whose header differs.
extern const char* const kTrajectoryHeader;

void write_trajectory(const TrajectoryLog& log, const std::string& path);
TrajectoryLog read_trajectory(const std::string& path);

/// Renders a standalone SVG: obstacle regions shaded by the sign of psi on a
/// fill grid (enlarged light, true dark), the trajectory as a single
/// polyline, start square, goal marker and waypoint diamonds. Output is
/// deterministic for fixed inputs.
std::string render_plot(const ScenarioFile& scenario, const TrajectoryLog& log,
                        const std::vector<Position>& waypoints = {});
void emit_plot(const ScenarioFile& scenario, const TrajectoryLog& log,
               const std::string& path, const std::vector<Position>& waypoints = {});

}  // namespace panocnav
