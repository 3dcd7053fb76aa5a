#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "octnet/errors.hpp"
#include "octnet/geometry.hpp"

namespace octnet {

/// Binary occupancy grid. Cell (r, c) covers x in [c, c+1), y in [r, r+1);
/// its centre point is (c + 0.5, r + 0.5). x runs along columns, y along
/// rows, so world coordinates are plain cell units.
struct OccupancyGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> cells;  // row-major, 1 = occupied

  OccupancyGrid() = default;
  OccupancyGrid(std::size_t r, std::size_t c, std::uint8_t fill = 0)
      : rows(r), cols(c), cells(r * c, fill) {}

  std::uint8_t at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  void set(std::size_t r, std::size_t c, std::uint8_t v) { cells[r * cols + c] = v; }

  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto v : cells) n += v;
    return n;
  }

  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
    return a.rows == b.rows && a.cols == b.cols && a.cells == b.cells;
  }
};

/// Parses the `.occ` map format:
///   line 1: "<rows> <cols>" in decimal, separated by a single space;
///   then exactly `rows` lines of exactly `cols` characters from {'0','1'};
///   every line newline-terminated, no trailing content.
inline OccupancyGrid parse_grid(const std::string& text, const std::string& origin) {
  std::size_t pos = 0;
  const auto take_line = [&](bool required) -> std::string {
    if (pos >= text.size()) {
      if (required) throw io_error(origin + ": unexpected end of file");
      return {};
    }
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) throw io_error(origin + ": line not newline-terminated");
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  const std::string header = take_line(true);
  std::size_t rows = 0, cols = 0;
  {
    std::istringstream hs(header);
    long long r = 0, c = 0;
    char extra = '\0';
    if (!(hs >> r >> c) || (hs >> extra) || r < 1 || c < 1)
      throw io_error(origin + ": malformed header '" + header + "'");
    rows = static_cast<std::size_t>(r);
    cols = static_cast<std::size_t>(c);
  }

  OccupancyGrid grid(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string line = take_line(true);
    if (line.size() != cols)
      throw io_error(origin + ": row " + std::to_string(r) + " has length " +
                     std::to_string(line.size()) + ", expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      const char ch = line[c];
      if (ch != '0' && ch != '1')
        throw io_error(origin + ": invalid character '" + std::string(1, ch) +
                       "' in row " + std::to_string(r));
      grid.set(r, c, ch == '1' ? 1 : 0);
    }
  }
  if (pos != text.size()) throw io_error(origin + ": trailing content after grid rows");
  return grid;
}

inline OccupancyGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open map file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str(), path);
}

inline std::string serialize_grid(const OccupancyGrid& grid) {
  std::string out;
  out.reserve(grid.rows * (grid.cols + 1) + 16);
  out += std::to_string(grid.rows);
  out += ' ';
  out += std::to_string(grid.cols);
  out += '\n';
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) out += grid.at(r, c) ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline void save_grid(const OccupancyGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write map file: " + path);
  out << serialize_grid(grid);
  if (!out) throw io_error("write failed: " + path);
}

/// One point per occupied cell, at the cell centre.
inline PointSet occupied_points(const OccupancyGrid& grid) {
  PointSet points;
  points.reserve(grid.occupied_count());
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c)
      if (grid.at(r, c))
        points.push_back({static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5});
  return points;
}

/// Floor-based cell lookup. Points outside the grid bounds report occupied,
/// which keeps rejection sampling from accepting trajectories that leave
/// the map.
inline bool is_occupied(const OccupancyGrid& grid, const Point2& p) {
  const double c = std::floor(p.x);
  const double r = std::floor(p.y);
  if (r < 0.0 || c < 0.0 || r >= static_cast<double>(grid.rows) ||
      c >= static_cast<double>(grid.cols))
    return true;
  return grid.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) != 0;
}

}  // namespace octnet
