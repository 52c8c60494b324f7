#include "panocnav/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace panocnav {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Shades cells where psi > 0 as row-run rectangles to keep the file small.
void shade_region(std::ostringstream& svg, const std::vector<ObstacleSpec>& obstacles,
                  const Rect& ws, int nx, int ny, bool use_true, const char* fill) {
    const double dx = (ws.x_max - ws.x_min) / nx;
    const double dy = (ws.y_max - ws.y_min) / ny;
    for (int iy = 0; iy < ny; ++iy) {
        int run_start = -1;
        for (int ix = 0; ix <= nx; ++ix) {
            bool inside = false;
            if (ix < nx) {
                Position z{ws.x_min + (ix + 0.5) * dx, ws.y_min + (iy + 0.5) * dy};
                for (const auto& ob : obstacles) {
                    double psi = use_true ? eval_psi_true(ob, z) : eval_psi(ob, z);
                    if (psi > 0.0) {
                        inside = true;
                        break;
                    }
                }
            }
            if (inside && run_start < 0) run_start = ix;
            if (!inside && run_start >= 0) {
                svg << "<rect x=\"" << fmt(ws.x_min + run_start * dx) << "\" y=\""
                    << fmt(ws.y_min + iy * dy) << "\" width=\"" << fmt((ix - run_start) * dx)
                    << "\" height=\"" << fmt(dy) << "\" fill=\"" << fill << "\"/>\n";
                run_start = -1;
            }
        }
    }
}

}  // namespace

std::string render_plot(const ScenarioFile& scenario, const TrajectoryLog& log,
                        const std::vector<Position>& waypoints) {
    if (log.rows.empty())
        throw ScenarioError(ScenarioError::Kind::Invalid, "cannot plot an empty trajectory");
    const Rect& ws = scenario.mission.workspace;
    if (ws.empty())
        throw ScenarioError(ScenarioError::Kind::Invalid, "workspace bounds are empty");

    const double span_x = ws.x_max - ws.x_min;
    const double span_y = ws.y_max - ws.y_min;
    const double pad = 0.05 * std::max(span_x, span_y);
    const int pixels = 720;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels << "\" height=\""
        << fmt(pixels * (span_y + 2 * pad) / (span_x + 2 * pad)) << "\" viewBox=\""
        << fmt(ws.x_min - pad) << " " << fmt(-(ws.y_max + pad)) << " " << fmt(span_x + 2 * pad)
        << " " << fmt(span_y + 2 * pad) << "\">\n";
    // flip y so the world y axis points up
    svg << "<g transform=\"scale(1,-1)\">\n";
    svg << "<rect x=\"" << fmt(ws.x_min - pad) << "\" y=\"" << fmt(ws.y_min - pad)
        << "\" width=\"" << fmt(span_x + 2 * pad) << "\" height=\"" << fmt(span_y + 2 * pad)
        << "\" fill=\"#ffffff\"/>\n";

    const int fill_nx = 220;
    const int fill_ny = std::max(1, static_cast<int>(fill_nx * span_y / span_x));
    shade_region(svg, scenario.obstacles, ws, fill_nx, fill_ny, false, "#c8d4e8");
    shade_region(svg, scenario.obstacles, ws, fill_nx, fill_ny, true, "#7d8aa6");

    const double mark = 0.02 * std::max(span_x, span_y);

    svg << "<polyline fill=\"none\" stroke=\"#101010\" stroke-width=\"" << fmt(mark * 0.25)
        << "\" points=\"";
    for (std::size_t i = 0; i < log.rows.size(); ++i) {
        if (i) svg << ' ';
        svg << fmt(log.rows[i].x) << ',' << fmt(log.rows[i].y);
    }
    svg << "\"/>\n";

    for (const Position& wp : waypoints) {
        svg << "<path d=\"M " << fmt(wp.x) << ' ' << fmt(wp.y - mark) << " L "
            << fmt(wp.x + mark) << ' ' << fmt(wp.y) << " L " << fmt(wp.x) << ' '
            << fmt(wp.y + mark) << " L " << fmt(wp.x - mark) << ' ' << fmt(wp.y)
            << " Z\" fill=\"#202020\"/>\n";
    }

    svg << "<rect x=\"" << fmt(scenario.start.x - mark) << "\" y=\""
        << fmt(scenario.start.y - mark) << "\" width=\"" << fmt(2 * mark) << "\" height=\""
        << fmt(2 * mark) << "\" fill=\"#2e8b57\"/>\n";
    svg << "<circle cx=\"" << fmt(scenario.goal.x) << "\" cy=\"" << fmt(scenario.goal.y)
        << "\" r=\"" << fmt(mark) << "\" fill=\"#b03030\"/>\n";

    svg << "</g>\n</svg>\n";
    return svg.str();
}

void emit_plot(const ScenarioFile& scenario, const TrajectoryLog& log,
               const std::string& path, const std::vector<Position>& waypoints) {
    std::string svg = render_plot(scenario, log, waypoints);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError(ScenarioError::Kind::Io, "cannot open '" + path + "'");
    out << svg;
    if (!out) throw ScenarioError(ScenarioError::Kind::Io, "failed while writing '" + path + "'");
}

}  // namespace panocnav
