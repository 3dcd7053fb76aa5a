#include <catch2/catch.hpp>

#include "octnet/generator.hpp"
#include "octnet/mdn.hpp"
#include "octnet/occupancy.hpp"
#include "octnet/rng.hpp"

using namespace octnet;

namespace {

/// Tiny trained-model stand-in: hand-set heads so the mixture is centred
/// on a straight horizontal path across the map with small spread.
MdnModel fixture_model(double mu_y, double spread) {
  MdnConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_sizes = {4};
  cfg.batch_norm_after_layer1 = false;
  cfg.dropout_rate = 0.0;
  cfg.num_components = 1;
  cfg.weight_dim = 8;  // M = 4
  cfg.family = DistFamily::normal;

  Rng rng(1);
  MdnModel model = init_model(cfg, TrainConfig{}, rng);
  model.basis = BasisConfig::make(4, 0.35);
  model.ridge = RidgeConfig{1e-4};
  model.kernel = KernelConfig{50.0};
  model.training_maps = {{{0.5, 0.5}}, {{1.5, 1.5}}};
  model.training_map_ids = {"a", "b"};

  for (DenseLayer* head : {&model.head_mu, &model.head_scale, &model.head_alpha}) {
    for (double& v : head->w.data) v = 0.0;
    for (double& v : head->b) v = 0.0;
  }
  // With lb = 0.35 the basis sum S(tau) stays in [1.8, 2.5]; these wx keep
  // x(tau) inside (2, 5.1) on an 8-column map, and y(tau) = mu_y * S(tau).
  model.head_mu.b = {0.8, 1.6, 2.4, 3.2, mu_y, mu_y, mu_y, mu_y};
  for (double& v : model.head_scale.b) v = std::log(spread);
  return model;
}

OccupancyGrid grid_from(const std::string& text) { return parse_grid(text, "fixture"); }

}  // namespace

TEST_CASE("is_valid checks evenly spaced points against the map") {
  const MdnModel model = fixture_model(0.9, 1e-6);
  const GenerationConfig cfg{20, 10};

  // 4x8 map, middle rows free
  const OccupancyGrid open = grid_from("4 8\n11111111\n00000000\n00000000\n11111111\n");
  TrajectoryWeights flat;
  flat.wx = {1.0, 2.0, 3.0, 4.0};
  flat.wy = {1.0, 1.0, 1.0, 1.0};  // y(tau) = S(tau) in [1.8, 2.5) -> free rows
  CHECK(is_valid(flat, model.basis, open, cfg));

  TrajectoryWeights through_wall = flat;
  for (double& v : through_wall.wy) v = 0.1;  // y < 1 -> occupied top row
  CHECK_FALSE(is_valid(through_wall, model.basis, open, cfg));

  TrajectoryWeights out_of_bounds = flat;
  for (double& v : out_of_bounds.wx) v = -2.0;  // x < 0 leaves the grid
  CHECK_FALSE(is_valid(out_of_bounds, model.basis, open, cfg));

  CHECK_THROWS_AS(is_valid(flat, model.basis, open, GenerationConfig{1, 10}),
                  std::invalid_argument);
}

TEST_CASE("generate returns a valid trajectory on the first draw when all space is free") {
  const MdnModel model = fixture_model(1.5, 1e-6);
  const OccupancyGrid free_map(4, 8, 0);  // no occupied cells at all
  const GenerationConfig cfg{50, 10};

  Rng rng(42);
  const TrajectoryWeights w = generate(model, free_map, cfg, rng);
  CHECK(is_valid(w, model.basis, free_map, cfg));

  Rng rng2(42);
  const BatchResult batch = generate_batch(model, free_map, cfg, 5, rng2);
  CHECK(batch.stats.accepted == 5);
  CHECK(batch.stats.attempts == 5);
  CHECK(batch.stats.acceptance_rate() == 1.0);
  CHECK(batch.stats.complete());
}

TEST_CASE("generate fails with an explicit error when nothing can validate") {
  const MdnModel model = fixture_model(1.5, 1e-6);
  const OccupancyGrid walls(4, 8, 1);  // every cell occupied
  const GenerationConfig cfg{20, 25};

  Rng rng(7);
  try {
    generate(model, walls, cfg, rng);
    FAIL("expected generation_error");
  } catch (const generation_error& e) {
    CHECK(e.attempts == 25);
  }

  Rng rng2(7);
  const BatchResult batch = generate_batch(model, walls, cfg, 3, rng2);
  CHECK(batch.stats.accepted == 0);
  CHECK(batch.stats.attempts == 25);
  CHECK_FALSE(batch.stats.complete());
  CHECK(batch.weights.empty());
}

TEST_CASE("every emitted trajectory re-validates") {
  const MdnModel model = fixture_model(0.9, 0.6);
  const OccupancyGrid corridor =
      grid_from("4 8\n11111111\n00000000\n00000000\n11111111\n");
  const GenerationConfig cfg{40, 2000};

  Rng rng(99);
  const BatchResult batch = generate_batch(model, corridor, cfg, 10, rng);
  REQUIRE(batch.stats.complete());
  CHECK(batch.stats.attempts >= batch.stats.accepted);
  for (const TrajectoryWeights& w : batch.weights)
    CHECK(is_valid(w, model.basis, corridor, cfg));
}

TEST_CASE("denser validity grids only reject more") {
  // checked points of the n-point grid are a subset of the (2n-1)-point grid
  const MdnModel model = fixture_model(0.9, 0.8);
  const OccupancyGrid corridor =
      grid_from("4 8\n11111111\n00000000\n00000000\n11111111\n");
  Rng rng(123);
  const MixtureParams params = forward_eval(
      model, SimilarityFeature{{0.5, 0.5}, {"a", "b"}});
  for (int trial = 0; trial < 200; ++trial) {
    const TrajectoryWeights w =
        TrajectoryWeights::from_concatenated(sample_weights(params, rng));
    const bool coarse = is_valid(w, model.basis, corridor, GenerationConfig{25, 1});
    const bool fine = is_valid(w, model.basis, corridor, GenerationConfig{49, 1});
    if (fine) CHECK(coarse);
  }
}

TEST_CASE("generation is bit-reproducible including rejections") {
  const MdnModel model = fixture_model(0.9, 0.9);
  const OccupancyGrid corridor =
      grid_from("4 8\n11111111\n00000000\n00000000\n11111111\n");
  const GenerationConfig cfg{30, 5000};

  Rng rng_a(2024), rng_b(2024);
  const BatchResult a = generate_batch(model, corridor, cfg, 8, rng_a);
  const BatchResult b = generate_batch(model, corridor, cfg, 8, rng_b);
  CHECK(a.stats.attempts == b.stats.attempts);
  REQUIRE(a.weights.size() == b.weights.size());
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    CHECK(a.weights[i].wx == b.weights[i].wx);
    CHECK(a.weights[i].wy == b.weights[i].wy);
  }
}
