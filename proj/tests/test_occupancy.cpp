#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>

#include "octnet/occupancy.hpp"
#include "octnet/rng.hpp"

using namespace octnet;

TEST_CASE("parse_grid reads well-formed maps") {
  const OccupancyGrid empty = parse_grid("2 2\n00\n00\n", "test");
  CHECK(empty.rows == 2);
  CHECK(empty.cols == 2);
  CHECK(empty.occupied_count() == 0);

  const OccupancyGrid diag = parse_grid("2 2\n10\n01\n", "test");
  CHECK(diag.at(0, 0) == 1);
  CHECK(diag.at(0, 1) == 0);
  CHECK(diag.at(1, 0) == 0);
  CHECK(diag.at(1, 1) == 1);
}

TEST_CASE("parse_grid rejects malformed input") {
  CHECK_THROWS_AS(parse_grid("2 2\n101\n01\n", "test"), io_error);  // row too long
  CHECK_THROWS_AS(parse_grid("2 2\n10\n0\n", "test"), io_error);    // row too short
  CHECK_THROWS_AS(parse_grid("2 2\n10\n0x\n", "test"), io_error);   // bad character
  CHECK_THROWS_AS(parse_grid("2\n10\n01\n", "test"), io_error);     // bad header
  CHECK_THROWS_AS(parse_grid("2 2 9\n10\n01\n", "test"), io_error); // extra header field
  CHECK_THROWS_AS(parse_grid("2 2\n10\n", "test"), io_error);       // missing row
  CHECK_THROWS_AS(parse_grid("2 2\n10\n01\nx\n", "test"), io_error);// trailing content
  CHECK_THROWS_AS(parse_grid("2 2\n10\n01", "test"), io_error);     // no final newline
  CHECK_THROWS_AS(parse_grid("0 2\n", "test"), io_error);           // zero rows
  CHECK_THROWS_AS(load_grid("/nonexistent/map.occ"), io_error);
}

TEST_CASE("occupied_points uses cell centres") {
  const OccupancyGrid free3 = parse_grid("3 3\n000\n000\n000\n", "test");
  CHECK(occupied_points(free3).empty());

  const OccupancyGrid diag = parse_grid("2 2\n10\n01\n", "test");
  const PointSet pts = occupied_points(diag);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == Point2{0.5, 0.5});
  CHECK(pts[1] == Point2{1.5, 1.5});

  const OccupancyGrid full = parse_grid("2 2\n11\n11\n", "test");
  CHECK(occupied_points(full).size() == 4);
}

TEST_CASE("is_occupied: floor lookup with occupied out-of-bounds") {
  const OccupancyGrid diag = parse_grid("2 2\n10\n01\n", "test");
  CHECK(is_occupied(diag, {0.5, 0.5}));        // inside the (0,0) wall
  CHECK_FALSE(is_occupied(diag, {1.5, 0.5}));  // free cell interior
  CHECK(is_occupied(diag, {-1.0, 0.5}));       // left of the grid
  CHECK(is_occupied(diag, {0.5, -0.2}));
  CHECK(is_occupied(diag, {2.0, 0.5}));        // x == cols is already outside
  CHECK(is_occupied(diag, {0.5, 2.5}));
}

TEST_CASE("occupied plus free cells account for the whole grid") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng.uniform_below(6);
    const std::size_t cols = 1 + rng.uniform_below(6);
    OccupancyGrid grid(rows, cols);
    for (auto& cell : grid.cells) cell = rng.uniform01() < 0.4 ? 1 : 0;
    CHECK(occupied_points(grid).size() + (rows * cols - grid.occupied_count()) == rows * cols);
  }
}

TEST_CASE("grid serialisation round-trips exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng.uniform_below(8);
    const std::size_t cols = 1 + rng.uniform_below(8);
    OccupancyGrid grid(rows, cols);
    for (auto& cell : grid.cells) cell = rng.uniform01() < 0.5 ? 1 : 0;
    CHECK(parse_grid(serialize_grid(grid), "round-trip") == grid);
  }

  const auto dir = std::filesystem::path("scratch_occupancy");
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  OccupancyGrid grid(3, 4);
  grid.set(1, 2, 1);
  grid.set(0, 0, 1);
  const std::string path = (dir / "grid.occ").string();
  save_grid(grid, path);
  CHECK(load_grid(path) == grid);
}
