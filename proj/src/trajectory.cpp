#include "panocnav/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace panocnav {

const char* const kTrajectoryHeader =
    "step,time_s,x,y,theta,u0,u1,max_psi_true,max_psi_enlarged,"
    "inner_iterations,outer_iterations,solve_time_ms,stop_flag,active_waypoint";

TrajectoryLog TrajectoryLog::from_mission(const MissionLog& mission, double ts) {
    TrajectoryLog log;
    log.rows.reserve(mission.records.size());
    long step = 0;
    for (const MissionRecord& rec : mission.records) {
        TrajectoryRow row;
        row.step = step;
        row.time_s = step * ts;
        row.x = rec.state.x;
        row.y = rec.state.y;
        row.theta = rec.state.theta;
        row.u0 = rec.input[0];
        row.u1 = rec.input[1];
        row.max_psi_true = rec.max_psi_true;
        row.max_psi_enlarged = rec.max_psi_enlarged;
        row.inner_iterations = rec.inner_iterations;
        row.outer_iterations = rec.outer_iterations;
        row.solve_time_ms = rec.solve_time_ms;
        row.stop_flag = rec.stop_flag ? 1 : 0;
        row.active_waypoint = rec.active_waypoint;
        log.rows.push_back(row);
        ++step;
    }
    return log;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void io_error(const std::string& message) {
    throw ScenarioError(ScenarioError::Kind::Io, message);
}

}  // namespace

void write_trajectory(const TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) io_error("cannot open '" + path + "' for writing");
    out << kTrajectoryHeader << "\n";
    for (const TrajectoryRow& r : log.rows) {
        out << r.step << ',' << format_double(r.time_s) << ',' << format_double(r.x) << ','
            << format_double(r.y) << ',' << format_double(r.theta) << ','
            << format_double(r.u0) << ',' << format_double(r.u1) << ','
            << format_double(r.max_psi_true) << ',' << format_double(r.max_psi_enlarged)
            << ',' << r.inner_iterations << ',' << r.outer_iterations << ','
            << format_double(r.solve_time_ms) << ',' << r.stop_flag << ','
            << r.active_waypoint << "\n";
    }
    if (!out) io_error("failed while writing '" + path + "'");
}

TrajectoryLog read_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) io_error("cannot open trajectory file '" + path + "'");

    std::string header;
    if (!std::getline(in, header)) io_error("trajectory file '" + path + "' is empty");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kTrajectoryHeader)
        throw ScenarioError(ScenarioError::Kind::Parse,
                            "trajectory header mismatch in '" + path + "'");

    TrajectoryLog log;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string field;
        std::vector<std::string> values;
        while (std::getline(fields, field, ',')) values.push_back(field);
        if (values.size() != 14)
            throw ScenarioError(ScenarioError::Kind::Parse,
                                path + ":" + std::to_string(line_no) +
                                    ": expected 14 comma-separated values");
        TrajectoryRow r;
        try {
            r.step = std::stol(values[0]);
            r.time_s = std::stod(values[1]);
            r.x = std::stod(values[2]);
            r.y = std::stod(values[3]);
            r.theta = std::stod(values[4]);
            r.u0 = std::stod(values[5]);
            r.u1 = std::stod(values[6]);
            r.max_psi_true = std::stod(values[7]);
            r.max_psi_enlarged = std::stod(values[8]);
            r.inner_iterations = std::stol(values[9]);
            r.outer_iterations = std::stol(values[10]);
            r.solve_time_ms = std::stod(values[11]);
            r.stop_flag = std::stoi(values[12]);
            r.active_waypoint = std::stol(values[13]);
        } catch (const std::exception&) {
            throw ScenarioError(ScenarioError::Kind::Parse,
                                path + ":" + std::to_string(line_no) + ": malformed value");
        }
        log.rows.push_back(r);
    }
    return log;
}

}  // namespace panocnav
