#pragma once

#include <string>
#include <vector>

#include "octnet/format.hpp"
#include "octnet/geometry.hpp"
#include "octnet/occupancy.hpp"

namespace octnet {

/// Styled trajectory group for plotting.
struct SvgTrajectoryGroup {
  std::vector<DiscreteTrajectory> trajectories;
  std::string stroke;  // CSS colour
};

/// Renders a map with overlaid trajectories as SVG 1.1: one rect per
/// occupied cell, one polyline per trajectory and one circle marker per
/// trajectory endpoint. Byte output is deterministic for fixed inputs.
inline std::string render_svg(const OccupancyGrid& grid,
                              const std::vector<SvgTrajectoryGroup>& groups,
                              double cell_px = 16.0) {
  const double width = static_cast<double>(grid.cols) * cell_px;
  const double height = static_cast<double>(grid.rows) * cell_px;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         format_double(width) + "\" height=\"" + format_double(height) + "\" viewBox=\"0 0 " +
         std::to_string(grid.cols) + " " + std::to_string(grid.rows) +
         "\" style=\"background:#ffffff\">\n";

  svg += "<g fill=\"#37474f\">\n";
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c)
      if (grid.at(r, c))
        svg += "<rect x=\"" + std::to_string(c) + "\" y=\"" + std::to_string(r) +
               "\" width=\"1\" height=\"1\"/>\n";
  svg += "</g>\n";

  for (const SvgTrajectoryGroup& group : groups) {
    svg += "<g stroke=\"" + group.stroke + "\" fill=\"none\" stroke-width=\"0.18\">\n";
    for (const DiscreteTrajectory& traj : group.trajectories) {
      svg += "<polyline points=\"";
      for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
        if (i) svg += ' ';
        svg += format_double(traj.waypoints[i].x) + "," + format_double(traj.waypoints[i].y);
      }
      svg += "\"/>\n";
    }
    svg += "</g>\n";
    svg += "<g fill=\"" + group.stroke + "\">\n";
    for (const DiscreteTrajectory& traj : group.trajectories) {
      if (traj.waypoints.empty()) continue;
      const Point2& end = traj.waypoints.back();
      svg += "<circle cx=\"" + format_double(end.x) + "\" cy=\"" + format_double(end.y) +
             "\" r=\"0.3\"/>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace octnet
