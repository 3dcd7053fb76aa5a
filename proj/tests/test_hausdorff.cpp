#include <catch2/catch.hpp>

#include <cmath>

#include "octnet/hausdorff.hpp"
#include "octnet/rng.hpp"
#include "oracles.hpp"

using namespace octnet;

namespace {

PointSet random_set(Rng& rng, std::size_t max_points) {
  PointSet pts(1 + rng.uniform_below(max_points));
  for (auto& p : pts) p = {rng.uniform_range(-20.0, 20.0), rng.uniform_range(-20.0, 20.0)};
  return pts;
}

}  // namespace

TEST_CASE("one-sided Hausdorff basics") {
  const PointSet a{{0.0, 0.0}, {10.0, 0.0}};
  const PointSet b{{0.0, 0.0}};
  CHECK(one_sided_hausdorff(a, a) == 0.0);
  CHECK(one_sided_hausdorff(PointSet{{0.0, 0.0}}, PointSet{{3.0, 4.0}}) == 5.0);

  const double expected = oracles::one_sided_hausdorff(a, b);
  CHECK(one_sided_hausdorff(a, b) == expected);
  CHECK(expected == 10.0);

  CHECK_THROWS_AS(one_sided_hausdorff({}, b), std::invalid_argument);
  CHECK_THROWS_AS(one_sided_hausdorff(a, {}), std::invalid_argument);
}

TEST_CASE("symmetric Hausdorff averages both directions") {
  const PointSet a{{0.0, 0.0}, {10.0, 0.0}};
  const PointSet b{{0.0, 0.0}};
  CHECK(symmetric_hausdorff(a, a) == 0.0);
  CHECK(symmetric_hausdorff(a, b) == 5.0);
  CHECK(symmetric_hausdorff(b, a) == 5.0);
}

TEST_CASE("implementation matches the brute-force oracle exactly") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const PointSet a = random_set(rng, 50);
    const PointSet b = random_set(rng, 50);
    CHECK(one_sided_hausdorff(a, b) == oracles::one_sided_hausdorff(a, b));
    CHECK(symmetric_hausdorff(a, b) == oracles::symmetric_hausdorff(a, b));
  }
}

TEST_CASE("one-sided distance is zero iff A is contained in B") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const PointSet b = random_set(rng, 20);
    PointSet a;
    for (std::size_t i = 0; i < b.size(); i += 2) a.push_back(b[i]);
    if (a.empty()) a.push_back(b[0]);
    CHECK(one_sided_hausdorff(a, b) <= 1e-12);

    PointSet outside = a;
    outside.push_back({100.0, 100.0});
    CHECK(one_sided_hausdorff(outside, b) > 1e-12);
  }
}

TEST_CASE("kernel value and limits") {
  const KernelConfig cfg{50.0};
  const PointSet a{{0.0, 0.0}};
  CHECK(hausdorff_kernel(a, a, cfg) == 1.0);

  // delta = 5, l_H = 50 -> exp(-25/100)
  const PointSet b{{5.0, 0.0}};
  CHECK(hausdorff_kernel(a, b, cfg) == Approx(std::exp(-0.25)).epsilon(1e-12));
  CHECK(hausdorff_kernel(a, b, cfg) == Approx(0.7788).epsilon(1e-4));

  double prev = 0.0;
  for (double scale : {1.0, 10.0, 100.0, 1e4, 1e8}) {
    const double v = hausdorff_kernel(a, b, KernelConfig{scale});
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev == Approx(1.0).margin(1e-9));
  CHECK_THROWS_AS(hausdorff_kernel(a, b, KernelConfig{0.0}), std::invalid_argument);
}

TEST_CASE("kernel stays in (0,1]") {
  Rng rng(9);
  const KernelConfig cfg{50.0};
  for (int trial = 0; trial < 100; ++trial) {
    const double v = hausdorff_kernel(random_set(rng, 30), random_set(rng, 30), cfg);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("gram features") {
  const KernelConfig cfg{50.0};
  const PointSet single{{1.0, 1.0}};
  const auto lone = gram_features({single}, cfg);
  REQUIRE(lone.size() == 1);
  REQUIRE(lone[0].values.size() == 1);
  CHECK(lone[0].values[0] == 1.0);

  Rng rng(17);
  std::vector<PointSet> maps;
  for (int i = 0; i < 6; ++i) maps.push_back(random_set(rng, 25));
  const auto features = gram_features(maps, cfg);
  REQUIRE(features.size() == maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    CHECK(features[i].values[i] == 1.0);
    for (std::size_t j = 0; j < maps.size(); ++j) {
      CHECK(std::abs(features[i].values[j] - features[j].values[i]) <= 1e-12);
      CHECK(features[i].values[j] > 0.0);
      CHECK(features[i].values[j] <= 1.0);
      CHECK(features[i].values[j] == hausdorff_kernel(maps[i], maps[j], cfg));
    }
  }
}

TEST_CASE("query feature against a frozen training set") {
  const KernelConfig cfg{50.0};
  Rng rng(23);
  std::vector<PointSet> training;
  for (int i = 0; i < 5; ++i) training.push_back(random_set(rng, 20));

  const SimilarityFeature phi = query_feature(training[3], training, cfg);
  REQUIRE(phi.values.size() == training.size());
  CHECK(phi.values[3] == 1.0);
  for (std::size_t n = 0; n < training.size(); ++n)
    CHECK(phi.values[n] == hausdorff_kernel(training[3], training[n], cfg));

  CHECK_THROWS_AS(query_feature(training[0], {}, cfg), std::invalid_argument);
}
