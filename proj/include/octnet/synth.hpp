#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <queue>
#include <string>
#include <vector>

#include <json.hpp>

#include "octnet/errors.hpp"
#include "octnet/geometry.hpp"
#include "octnet/occupancy.hpp"
#include "octnet/rng.hpp"
#include "octnet/trajectory_io.hpp"

namespace octnet {

/// Synthetic indoor dataset: every map is a fully walled grid with a
/// horizontal corridor and rectangular rooms attached above and below it,
/// each opening into the corridor through a short door.
struct SynthParams {
  std::size_t num_maps = 120;
  std::size_t rows = 32;
  std::size_t cols = 32;
  std::size_t rooms_min = 2;
  std::size_t rooms_max = 3;
  std::size_t corridor_width = 2;
  std::size_t trajectories_per_map = 6;
  std::size_t waypoints = 100;  // T
  std::uint64_t seed = 1;

  void validate() const {
    if (num_maps < 1) throw std::invalid_argument("SynthParams: num_maps must be >= 1");
    if (rooms_min < 2) throw std::invalid_argument("SynthParams: rooms_min must be >= 2");
    if (rooms_max < rooms_min) throw std::invalid_argument("SynthParams: rooms_max < rooms_min");
    if (corridor_width < 1) throw std::invalid_argument("SynthParams: corridor_width must be >= 1");
    if (trajectories_per_map < 1)
      throw std::invalid_argument("SynthParams: trajectories_per_map must be >= 1");
    if (waypoints < 2) throw std::invalid_argument("SynthParams: waypoints must be >= 2");
  }
};

struct DatasetEntry {
  std::string map_id;
  OccupancyGrid grid;
  std::vector<DiscreteTrajectory> trajectories;
};

struct Dataset {
  SynthParams params_echo;
  std::vector<DatasetEntry> entries;
};

struct RoomRect {
  std::size_t r0, r1, c0, c1;  // inclusive bounds

  std::size_t center_row() const { return (r0 + r1) / 2; }
  std::size_t center_col() const { return (c0 + c1) / 2; }
};

namespace detail {

struct Cell {
  std::size_t r, c;
};

inline void carve(OccupancyGrid& grid, std::size_t r0, std::size_t r1, std::size_t c0,
                  std::size_t c1) {
  for (std::size_t r = r0; r <= r1; ++r)
    for (std::size_t c = c0; c <= c1; ++c) grid.set(r, c, 0);
}

inline std::size_t flood_fill_count(const OccupancyGrid& grid, std::size_t r, std::size_t c) {
  std::vector<std::uint8_t> seen(grid.rows * grid.cols, 0);
  std::queue<Cell> queue;
  queue.push({r, c});
  seen[r * grid.cols + c] = 1;
  std::size_t count = 0;
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop();
    ++count;
    const long long dr[] = {-1, 1, 0, 0};
    const long long dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const long long nr = static_cast<long long>(cur.r) + dr[k];
      const long long nc = static_cast<long long>(cur.c) + dc[k];
      if (nr < 0 || nc < 0 || nr >= static_cast<long long>(grid.rows) ||
          nc >= static_cast<long long>(grid.cols))
        continue;
      const std::size_t idx = static_cast<std::size_t>(nr) * grid.cols +
                              static_cast<std::size_t>(nc);
      if (seen[idx] || grid.cells[idx]) continue;
      seen[idx] = 1;
      queue.push({static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)});
    }
  }
  return count;
}

}  // namespace detail

/// Builds one map. Throws synth_error when the parameters leave no room
/// for the requested layout; never degrades silently.
inline OccupancyGrid synth_map(const SynthParams& params, Rng& rng) {
  params.validate();
  const std::size_t rows = params.rows, cols = params.cols, cw = params.corridor_width;
  if (rows < cw + 10 || cols < 12)
    throw synth_error("synth_map: grid too small for corridor and rooms");

  // central corridor; keeping the band fixed across maps standardises the
  // vertical geometry, so trajectory families share their y-profiles and
  // only the room layout varies from map to map
  const std::size_t ct = (rows - cw) / 2;

  OccupancyGrid grid(rows, cols, 1);
  detail::carve(grid, ct, ct + cw - 1, 1, cols - 2);

  const std::size_t rooms_n = static_cast<std::size_t>(rng.uniform_int(
      static_cast<std::int64_t>(params.rooms_min), static_cast<std::int64_t>(params.rooms_max)));

  struct Placed {
    std::size_t c0, c1;
    bool top;
  };
  std::vector<Placed> placed;

  // cap widths so the rooms sharing a side always fit with 1-cell gaps
  const std::size_t per_side = (rooms_n + 1) / 2;
  const std::size_t fit_cap =
      per_side > 1 ? (cols - 2 - (per_side - 1)) / per_side - 1 : cols - 2;
  const std::size_t wmax = std::min<std::size_t>(13, fit_cap);
  if (wmax < 6)
    throw synth_error("synth_map: grid too narrow for " + std::to_string(rooms_n) + " rooms");

  for (std::size_t i = 0; i < rooms_n; ++i) {
    const bool top = i % 2 == 0;
    const std::size_t avail = top ? ct - 2 : rows - ct - cw - 2;
    bool ok = false;
    for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
      // rooms live on a coarse lattice of door positions, so the layout
      // family is a small compositional set the similarity features can
      // resolve from a 96-map training sample
      const std::size_t w = std::min<std::size_t>(10, wmax);
      const std::size_t slots = w / 3 < 1 ? 1 : (cols - 2 - w) / (w - 3) + 1;
      const std::size_t c0 =
          1 + (w - 3) * static_cast<std::size_t>(rng.uniform_below(slots));
      const std::size_t c1 = c0 + w - 1;
      bool overlap = false;
      for (const Placed& p : placed)
        if (p.top == top && !(c0 > p.c1 + 1 || c1 + 1 < p.c0)) overlap = true;
      if (overlap) continue;

      // shallow rooms hugging the corridor: routes spend most of their
      // time in the corridor band, which every map shares
      const std::size_t h = std::min<std::size_t>(5, avail);
      std::size_t r0, r1, wall_row;
      if (top) {
        r1 = ct - 2;
        r0 = r1 - h + 1;
        wall_row = ct - 1;
      } else {
        r0 = ct + cw + 1;
        r1 = r0 + h - 1;
        wall_row = ct + cw;
      }
      detail::carve(grid, r0, r1, c0, c1);
      const std::size_t dw = std::min<std::size_t>(6, w - 2);
      const std::size_t dc = c0 + (w - dw) / 2;  // door centred in the room
      detail::carve(grid, wall_row, wall_row, dc, dc + dw - 1);
      placed.push_back({c0, c1, top});
      ok = true;
    }
    if (!ok) {
      // deterministic fallback: leftmost minimum-width slot
      const std::size_t w = 6;
      for (std::size_t c0 = 1; c0 + w <= cols - 1 && !ok; ++c0) {
        const std::size_t c1 = c0 + w - 1;
        bool overlap = false;
        for (const Placed& p : placed)
          if (p.top == top && !(c0 > p.c1 + 1 || c1 + 1 < p.c0)) overlap = true;
        if (overlap) continue;
        const std::size_t h = std::min<std::size_t>(5, avail);
        std::size_t r0, r1, wall_row;
        if (top) {
          r1 = ct - 2;
          r0 = r1 - h + 1;
          wall_row = ct - 1;
        } else {
          r0 = ct + cw + 1;
          r1 = r0 + h - 1;
          wall_row = ct + cw;
        }
        detail::carve(grid, r0, r1, c0, c1);
        detail::carve(grid, wall_row, wall_row, c0 + 2, c0 + 3);
        placed.push_back({c0, c1, top});
        ok = true;
      }
    }
    if (!ok)
      throw synth_error("synth_map: params too tight to place room " + std::to_string(i + 1) +
                        " of " + std::to_string(rooms_n));
  }

  // every free cell must be reachable from the corridor
  const std::size_t free_count = rows * cols - grid.occupied_count();
  if (detail::flood_fill_count(grid, ct, 1) != free_count)
    throw synth_error("synth_map: free space not connected");
  return grid;
}

/// Recovers the room rectangles of a synth_map-style grid: corridor rows
/// are the full-width free rows; removing them splits the free space into
/// one component per room (plus its door stub, at most 2 cells wide,
/// which is filtered out by the >= 3 cells-per-row rule).
inline std::vector<RoomRect> detect_rooms(const OccupancyGrid& grid) {
  std::vector<std::uint8_t> corridor_row(grid.rows, 0);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    bool full = grid.cols > 2;
    for (std::size_t c = 1; c + 1 < grid.cols && full; ++c)
      if (grid.at(r, c)) full = false;
    corridor_row[r] = full ? 1 : 0;
  }

  std::vector<int> comp(grid.rows * grid.cols, -1);
  int next_comp = 0;
  std::vector<RoomRect> rooms;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    if (corridor_row[r]) continue;
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (grid.at(r, c) || comp[r * grid.cols + c] >= 0) continue;
      const int id = next_comp++;
      std::queue<detail::Cell> queue;
      queue.push({r, c});
      comp[r * grid.cols + c] = id;
      std::vector<detail::Cell> cells;
      while (!queue.empty()) {
        const detail::Cell cur = queue.front();
        queue.pop();
        cells.push_back(cur);
        const long long dr[] = {-1, 1, 0, 0};
        const long long dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const long long nr = static_cast<long long>(cur.r) + dr[k];
          const long long nc = static_cast<long long>(cur.c) + dc[k];
          if (nr < 0 || nc < 0 || nr >= static_cast<long long>(grid.rows) ||
              nc >= static_cast<long long>(grid.cols))
            continue;
          if (corridor_row[static_cast<std::size_t>(nr)]) continue;
          const std::size_t idx = static_cast<std::size_t>(nr) * grid.cols +
                                  static_cast<std::size_t>(nc);
          if (comp[idx] >= 0 || grid.cells[idx]) continue;
          comp[idx] = id;
          queue.push({static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)});
        }
      }
      // keep the rows that are wider than a door stub
      std::vector<std::size_t> per_row(grid.rows, 0);
      for (const auto& cell : cells) ++per_row[cell.r];
      RoomRect rect{grid.rows, 0, grid.cols, 0};
      bool any = false;
      for (const auto& cell : cells) {
        if (per_row[cell.r] < 3) continue;
        any = true;
        rect.r0 = std::min(rect.r0, cell.r);
        rect.r1 = std::max(rect.r1, cell.r);
        rect.c0 = std::min(rect.c0, cell.c);
        rect.c1 = std::max(rect.c1, cell.c);
      }
      if (any) rooms.push_back(rect);
    }
  }
  std::sort(rooms.begin(), rooms.end(), [](const RoomRect& a, const RoomRect& b) {
    return a.r0 != b.r0 ? a.r0 < b.r0 : a.c0 < b.c0;
  });
  return rooms;
}

namespace detail {

/// Canonical grid shortest path: BFS distance field from the goal and a
/// deterministic downhill walk with a fixed neighbour preference. Every
/// call for the same (grid, start, goal) returns the same path; trajectory
/// variety comes from the jitter applied afterwards.
inline std::vector<Cell> canonical_shortest_path(const OccupancyGrid& grid, Cell start,
                                                 Cell goal) {
  const std::size_t inf = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(grid.rows * grid.cols, inf);
  std::queue<Cell> queue;
  dist[goal.r * grid.cols + goal.c] = 0;
  queue.push(goal);
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop();
    const std::size_t d = dist[cur.r * grid.cols + cur.c];
    const long long dr[] = {-1, 1, 0, 0};
    const long long dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const long long nr = static_cast<long long>(cur.r) + dr[k];
      const long long nc = static_cast<long long>(cur.c) + dc[k];
      if (nr < 0 || nc < 0 || nr >= static_cast<long long>(grid.rows) ||
          nc >= static_cast<long long>(grid.cols))
        continue;
      const std::size_t idx = static_cast<std::size_t>(nr) * grid.cols +
                              static_cast<std::size_t>(nc);
      if (grid.cells[idx] || dist[idx] != inf) continue;
      dist[idx] = d + 1;
      queue.push({static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)});
    }
  }
  if (dist[start.r * grid.cols + start.c] == inf)
    throw synth_error("canonical_shortest_path: rooms not mutually reachable");

  std::vector<Cell> path{start};
  Cell cur = start;
  while (!(cur.r == goal.r && cur.c == goal.c)) {
    const std::size_t d = dist[cur.r * grid.cols + cur.c];
    const long long dr[] = {-1, 1, 0, 0};
    const long long dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const long long nr = static_cast<long long>(cur.r) + dr[k];
      const long long nc = static_cast<long long>(cur.c) + dc[k];
      if (nr < 0 || nc < 0 || nr >= static_cast<long long>(grid.rows) ||
          nc >= static_cast<long long>(grid.cols))
        continue;
      const std::size_t idx = static_cast<std::size_t>(nr) * grid.cols +
                              static_cast<std::size_t>(nc);
      if (dist[idx] == d - 1) {
        cur = {static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)};
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

/// Smooth low-frequency offset field over the polyline: a handful of
/// uniform control offsets, linearly interpolated along the path. Keeps
/// repeated routes between the same rooms distinct without the large
/// path-level variance a randomised shortest path would add.
inline std::vector<Point2> jitter_polyline(const std::vector<Point2>& pts, Rng& rng,
                                           double amplitude) {
  constexpr std::size_t kControls = 5;
  double ox[kControls], oy[kControls];
  for (std::size_t k = 0; k < kControls; ++k) {
    ox[k] = rng.uniform_range(-amplitude, amplitude);
    oy[k] = rng.uniform_range(-amplitude, amplitude);
  }
  ox[0] = oy[0] = ox[kControls - 1] = oy[kControls - 1] = 0.0;  // endpoints pinned
  std::vector<Point2> out = pts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double pos = pts.size() > 1
                           ? static_cast<double>(i) / static_cast<double>(pts.size() - 1)
                           : 0.0;
    const double scaled = pos * static_cast<double>(kControls - 1);
    const std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(scaled),
                                                  kControls - 2);
    const double frac = scaled - static_cast<double>(seg);
    out[i].x += ox[seg] + frac * (ox[seg + 1] - ox[seg]);
    out[i].y += oy[seg] + frac * (oy[seg + 1] - oy[seg]);
  }
  return out;
}

inline std::vector<Point2> cells_to_centers(const std::vector<Cell>& cells) {
  std::vector<Point2> pts;
  pts.reserve(cells.size());
  for (const Cell& cell : cells)
    pts.push_back({static_cast<double>(cell.c) + 0.5, static_cast<double>(cell.r) + 0.5});
  return pts;
}

/// Pulls points travelling inside the corridor band onto its centre line,
/// giving the smoothed route equal clearance to both corridor walls.
inline void center_in_corridor(const OccupancyGrid& grid, const std::vector<Cell>& cells,
                               std::vector<Point2>& pts) {
  std::vector<std::uint8_t> corridor_row(grid.rows, 0);
  std::size_t band_lo = grid.rows, band_hi = 0;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    bool full = grid.cols > 2;
    for (std::size_t c = 1; c + 1 < grid.cols && full; ++c)
      if (grid.at(r, c)) full = false;
    if (full) {
      corridor_row[r] = 1;
      band_lo = std::min(band_lo, r);
      band_hi = std::max(band_hi, r);
    }
  }
  if (band_lo > band_hi) return;
  const double center_y = 0.5 * (static_cast<double>(band_lo) + static_cast<double>(band_hi)) + 0.5;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (corridor_row[cells[i].r]) pts[i].y = center_y;
}

/// Window-5 moving average over the interior points; endpoints stay fixed.
inline std::vector<Point2> smooth_polyline(const std::vector<Point2>& pts) {
  if (pts.size() < 3) return pts;
  std::vector<Point2> out = pts;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(i + 2, pts.size() - 1);
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      sx += pts[j].x;
      sy += pts[j].y;
    }
    const double n = static_cast<double>(hi - lo + 1);
    out[i] = {sx / n, sy / n};
  }
  return out;
}

/// Arc-length resampling to exactly n points, both endpoints included.
inline std::vector<Point2> resample_polyline(const std::vector<Point2>& pts, std::size_t n) {
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < pts.size(); ++i)
    cumulative.push_back(cumulative.back() + point_distance(pts[i - 1], pts[i]));
  const double total = cumulative.back();
  std::vector<Point2> out;
  out.reserve(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(n - 1);
    while (seg + 2 < pts.size() && cumulative[seg + 1] < target) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double frac = seg_len > 0.0 ? (target - cumulative[seg]) / seg_len : 0.0;
    out.push_back({pts[seg].x + frac * (pts[seg + 1].x - pts[seg].x),
                   pts[seg].y + frac * (pts[seg + 1].y - pts[seg].y)});
  }
  return out;
}

inline bool all_waypoints_free(const OccupancyGrid& grid, const std::vector<Point2>& pts) {
  for (const Point2& p : pts)
    if (is_occupied(grid, p)) return false;
  return true;
}

}  // namespace detail

/// Simulated motion: each trajectory follows a randomly drawn grid
/// shortest path between the centres of two distinct rooms, smoothed and
/// resampled to exactly T waypoints. Pairs are cycled in both directions,
/// so opposite directions of travel always appear once T_per_map >= 2.
inline std::vector<DiscreteTrajectory> synth_trajectories(const OccupancyGrid& grid,
                                                          const SynthParams& params, Rng& rng) {
  params.validate();
  const std::vector<RoomRect> rooms = detect_rooms(grid);
  if (rooms.size() < 2) throw synth_error("synth_trajectories: fewer than two rooms detected");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < rooms.size(); ++i)
    for (std::size_t j = 0; j < rooms.size(); ++j)
      if (i != j) pairs.emplace_back(i, j);

  std::vector<DiscreteTrajectory> trajs;
  for (std::size_t p = 0; p < params.trajectories_per_map; ++p) {
    const auto [from, to] = pairs[p % pairs.size()];
    const detail::Cell start{rooms[from].center_row(), rooms[from].center_col()};
    const detail::Cell goal{rooms[to].center_row(), rooms[to].center_col()};

    const std::vector<detail::Cell> path = detail::canonical_shortest_path(grid, start, goal);
    std::vector<Point2> raw = detail::cells_to_centers(path);
    detail::center_in_corridor(grid, path, raw);
    const std::vector<Point2> smoothed = detail::smooth_polyline(raw);

    DiscreteTrajectory traj;
    for (int attempt = 0; attempt < 20; ++attempt) {
      std::vector<Point2> sampled = detail::resample_polyline(
          detail::jitter_polyline(smoothed, rng, 0.2), params.waypoints);
      if (!detail::all_waypoints_free(grid, sampled)) {
        sampled = detail::resample_polyline(smoothed, params.waypoints);
        if (!detail::all_waypoints_free(grid, sampled)) {
          sampled = detail::resample_polyline(raw, params.waypoints);
          if (!detail::all_waypoints_free(grid, sampled))
            throw synth_error("synth_trajectories: raw shortest path produced occupied waypoint");
        }
      }
      traj.waypoints = std::move(sampled);
      const bool duplicate =
          std::any_of(trajs.begin(), trajs.end(), [&](const auto& t) { return t == traj; });
      if (!duplicate) break;
    }
    trajs.push_back(std::move(traj));
  }
  return trajs;
}

/// Baseline generator: uniform free start cell, then T-1 unit steps in
/// the 4-neighbourhood restricted to free cells (staying put when boxed
/// in).
inline DiscreteTrajectory random_baseline(const OccupancyGrid& grid, std::size_t t_count,
                                          Rng& rng) {
  if (t_count < 1) throw std::invalid_argument("random_baseline: T must be >= 1");
  std::vector<detail::Cell> free_cells;
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c)
      if (!grid.at(r, c)) free_cells.push_back({r, c});
  if (free_cells.empty()) throw std::invalid_argument("random_baseline: no free cell");

  detail::Cell cur = free_cells[rng.uniform_below(free_cells.size())];
  DiscreteTrajectory traj;
  traj.waypoints.push_back(
      {static_cast<double>(cur.c) + 0.5, static_cast<double>(cur.r) + 0.5});
  for (std::size_t t = 1; t < t_count; ++t) {
    detail::Cell options[4];
    std::size_t n_options = 0;
    const long long dr[] = {-1, 1, 0, 0};
    const long long dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const long long nr = static_cast<long long>(cur.r) + dr[k];
      const long long nc = static_cast<long long>(cur.c) + dc[k];
      if (nr < 0 || nc < 0 || nr >= static_cast<long long>(grid.rows) ||
          nc >= static_cast<long long>(grid.cols))
        continue;
      if (grid.at(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc))) continue;
      options[n_options++] = {static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)};
    }
    if (n_options > 0) cur = options[rng.uniform_below(n_options)];
    traj.waypoints.push_back(
        {static_cast<double>(cur.c) + 0.5, static_cast<double>(cur.r) + 0.5});
  }
  return traj;
}

inline std::string make_map_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "map_%03zu", index);
  return buf;
}

/// Full synthetic dataset; each map derives its own generator from
/// (seed, map index), so outputs are order-independent and reproducible.
inline Dataset make_dataset(const SynthParams& params) {
  params.validate();
  Dataset dataset;
  dataset.params_echo = params;
  for (std::size_t i = 0; i < params.num_maps; ++i) {
    Rng rng(derive_seed(params.seed, i));
    DatasetEntry entry;
    entry.map_id = make_map_id(i);
    entry.grid = synth_map(params, rng);
    entry.trajectories = synth_trajectories(entry.grid, params, rng);
    dataset.entries.push_back(std::move(entry));
  }
  return dataset;
}

/// Seeded shuffle, then partition by map. Train side gets
/// floor(fraction * N) maps, clamped so both sides keep at least one.
inline std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                         std::uint64_t seed) {
  if (dataset.entries.size() < 2) throw std::invalid_argument("split: need at least 2 maps");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: fraction must be in (0,1)");
  const std::size_t n = dataset.entries.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::size_t train_n = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n)));
  train_n = std::max<std::size_t>(1, std::min(train_n, n - 1));

  std::vector<std::uint8_t> in_train(n, 0);
  for (std::size_t i = 0; i < train_n; ++i) in_train[order[i]] = 1;

  Dataset train, test;
  train.params_echo = dataset.params_echo;
  test.params_echo = dataset.params_echo;
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? train : test).entries.push_back(dataset.entries[i]);
  return {std::move(train), std::move(test)};
}

/// Re-checks the invariants a well-formed dataset must satisfy; used by
/// the loader and after synthesis.
inline void validate_dataset(const Dataset& dataset) {
  for (const DatasetEntry& entry : dataset.entries) {
    if (entry.trajectories.empty())
      throw io_error("dataset: map " + entry.map_id + " has no trajectories");
    for (std::size_t t = 0; t < entry.trajectories.size(); ++t)
      for (const Point2& p : entry.trajectories[t].waypoints)
        if (is_occupied(entry.grid, p))
          throw io_error("dataset: map " + entry.map_id + " trajectory " + std::to_string(t) +
                         " has a waypoint in an occupied cell");
  }
}

namespace detail {

inline nlohmann::json synth_params_to_json(const SynthParams& p) {
  return nlohmann::json{{"num_maps", p.num_maps},
                        {"rows", p.rows},
                        {"cols", p.cols},
                        {"rooms_min", p.rooms_min},
                        {"rooms_max", p.rooms_max},
                        {"corridor_width", p.corridor_width},
                        {"trajectories_per_map", p.trajectories_per_map},
                        {"waypoints", p.waypoints},
                        {"seed", p.seed}};
}

inline SynthParams synth_params_from_json(const nlohmann::json& j) {
  SynthParams p;
  p.num_maps = j.at("num_maps").get<std::size_t>();
  p.rows = j.at("rows").get<std::size_t>();
  p.cols = j.at("cols").get<std::size_t>();
  p.rooms_min = j.at("rooms_min").get<std::size_t>();
  p.rooms_max = j.at("rooms_max").get<std::size_t>();
  p.corridor_width = j.at("corridor_width").get<std::size_t>();
  p.trajectories_per_map = j.at("trajectories_per_map").get<std::size_t>();
  p.waypoints = j.at("waypoints").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace detail

/// Writes maps/, trajectories/ and a manifest listing them with paths
/// relative to the manifest location.
inline void save_dataset(const Dataset& dataset, const std::string& dir,
                         const std::string& manifest_name = "manifest.json",
                         const nlohmann::json& extra = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "maps", ec);
  fs::create_directories(fs::path(dir) / "trajectories", ec);
  if (ec) throw io_error("cannot create dataset directories under " + dir);

  nlohmann::json entries = nlohmann::json::array();
  for (const DatasetEntry& entry : dataset.entries) {
    const std::string map_rel = "maps/" + entry.map_id + ".occ";
    const std::string traj_rel = "trajectories/" + entry.map_id + ".csv";
    save_grid(entry.grid, (fs::path(dir) / map_rel).string());
    save_trajectories(entry.trajectories, (fs::path(dir) / traj_rel).string());
    entries.push_back({{"map_id", entry.map_id}, {"map", map_rel}, {"trajectories", traj_rel}});
  }
  nlohmann::json manifest{{"format_version", 1},
                          {"synth_params", detail::synth_params_to_json(dataset.params_echo)},
                          {"entries", std::move(entries)}};
  if (!extra.is_null() && !extra.empty())
    for (const auto& [key, value] : extra.items()) manifest[key] = value;

  std::ofstream out(fs::path(dir) / manifest_name, std::ios::binary);
  if (!out) throw io_error("cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';
  if (!out) throw io_error("manifest write failed in " + dir);
}

/// Writes a manifest only (no map/trajectory files), for split views over
/// an already saved dataset.
inline void save_manifest_view(const Dataset& dataset, const std::string& dir,
                               const std::string& manifest_name, const nlohmann::json& extra) {
  namespace fs = std::filesystem;
  nlohmann::json entries = nlohmann::json::array();
  for (const DatasetEntry& entry : dataset.entries)
    entries.push_back({{"map_id", entry.map_id},
                       {"map", "maps/" + entry.map_id + ".occ"},
                       {"trajectories", "trajectories/" + entry.map_id + ".csv"}});
  nlohmann::json manifest{{"format_version", 1},
                          {"synth_params", detail::synth_params_to_json(dataset.params_echo)},
                          {"entries", std::move(entries)}};
  if (!extra.is_null() && !extra.empty())
    for (const auto& [key, value] : extra.items()) manifest[key] = value;
  std::ofstream out(fs::path(dir) / manifest_name, std::ios::binary);
  if (!out) throw io_error("cannot write manifest " + manifest_name + " in " + dir);
  out << manifest.dump(2) << '\n';
  if (!out) throw io_error("manifest write failed in " + dir);
}

inline Dataset load_dataset(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw io_error("cannot open manifest: " + manifest_path);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("manifest " + manifest_path + ": " + e.what());
  }

  Dataset dataset;
  try {
    if (manifest.at("format_version").get<int>() != 1)
      throw io_error("manifest " + manifest_path + ": unsupported format_version");
    dataset.params_echo = detail::synth_params_from_json(manifest.at("synth_params"));
    const fs::path base = fs::path(manifest_path).parent_path();
    for (const nlohmann::json& e : manifest.at("entries")) {
      DatasetEntry entry;
      entry.map_id = e.at("map_id").get<std::string>();
      entry.grid = load_grid((base / e.at("map").get<std::string>()).string());
      entry.trajectories =
          load_trajectories((base / e.at("trajectories").get<std::string>()).string());
      dataset.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw io_error("manifest " + manifest_path + ": " + e.what());
  }
  validate_dataset(dataset);
  return dataset;
}

}  // namespace octnet
