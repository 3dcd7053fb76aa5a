#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "octnet/errors.hpp"
#include "octnet/format.hpp"
#include "octnet/geometry.hpp"

namespace octnet {

/// Trajectory CSV format: header `traj_id,t,x,y`, rows sorted by
/// (traj_id, t), t the integer timestep 1..T, coordinates in world units.
/// Coordinates are written in shortest round-trip form, so a write/read
/// cycle preserves every double exactly.
inline std::string serialize_trajectories(const std::vector<DiscreteTrajectory>& trajs) {
  std::string out = "traj_id,t,x,y\n";
  for (std::size_t id = 0; id < trajs.size(); ++id) {
    const auto& wps = trajs[id].waypoints;
    for (std::size_t t = 0; t < wps.size(); ++t) {
      out += std::to_string(id);
      out += ',';
      out += std::to_string(t + 1);
      out += ',';
      out += format_double(wps[t].x);
      out += ',';
      out += format_double(wps[t].y);
      out += '\n';
    }
  }
  return out;
}

inline void save_trajectories(const std::vector<DiscreteTrajectory>& trajs,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write trajectory file: " + path);
  out << serialize_trajectories(trajs);
  if (!out) throw io_error("write failed: " + path);
}

inline std::vector<DiscreteTrajectory> parse_trajectories(const std::string& text,
                                                          const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw io_error(origin + ": empty trajectory file");
  if (line == "traj_id,t,x,y\r") line.pop_back();
  if (line != "traj_id,t,x,y")
    throw io_error(origin + ": bad header '" + line + "'");

  std::vector<DiscreteTrajectory> trajs;
  long long prev_id = -1;
  long long prev_t = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string fields[4];
    std::size_t field = 0, start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (field >= 4) throw io_error(origin + ": too many fields at line " +
                                       std::to_string(line_no));
        fields[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (field != 4)
      throw io_error(origin + ": expected 4 fields at line " + std::to_string(line_no));
    const std::string ctx = origin + ":" + std::to_string(line_no);
    const long long id = parse_int(fields[0], ctx);
    const long long t = parse_int(fields[1], ctx);
    const double x = parse_double(fields[2], ctx);
    const double y = parse_double(fields[3], ctx);

    if (id == prev_id + 1) {
      trajs.emplace_back();
      prev_id = id;
      prev_t = 0;
    } else if (id != prev_id) {
      throw io_error(ctx + ": traj_id out of order");
    }
    if (t != prev_t + 1) throw io_error(ctx + ": timestep out of order");
    prev_t = t;
    trajs.back().waypoints.push_back({x, y});
  }
  return trajs;
}

inline std::vector<DiscreteTrajectory> load_trajectories(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open trajectory file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trajectories(buf.str(), path);
}

}  // namespace octnet
