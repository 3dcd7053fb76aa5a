#include <catch2/catch.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "gradcheck.hpp"
#include "octnet/mdn.hpp"
#include "octnet/model_io.hpp"
#include "octnet/rng.hpp"
#include "oracles.hpp"

using namespace octnet;

namespace {

MdnConfig small_config(DistFamily family, std::size_t input_dim = 4,
                       std::size_t components = 2, std::size_t weight_dim = 6) {
  MdnConfig cfg;
  cfg.input_dim = input_dim;
  cfg.hidden_sizes = {16, 16};
  cfg.num_components = components;
  cfg.weight_dim = weight_dim;
  cfg.family = family;
  return cfg;
}

SimilarityFeature make_phi(Rng& rng, std::size_t n) {
  SimilarityFeature phi;
  for (std::size_t i = 0; i < n; ++i) {
    phi.values.push_back(rng.uniform01());
    phi.reference_ids.push_back(std::to_string(i));
  }
  return phi;
}

MixtureParams make_params(DistFamily family, std::vector<double> alpha, Matrix mu,
                          Matrix scale) {
  MixtureParams p;
  p.family = family;
  p.alpha = std::move(alpha);
  p.mu = std::move(mu);
  p.scale = std::move(scale);
  return p;
}

}  // namespace

TEST_CASE("forward produces well-formed mixture parameters") {
  Rng init_rng(3);
  MdnModel model = init_model(small_config(DistFamily::normal), TrainConfig{}, init_rng);
  Rng rng(5);
  const SimilarityFeature phi = make_phi(rng, 4);

  for (RunMode mode : {RunMode::eval, RunMode::train}) {
    const MixtureParams params = forward(model, phi, mode, rng);
    REQUIRE(params.alpha.size() == 2);
    REQUIRE(params.mu.rows == 2);
    REQUIRE(params.mu.cols == 6);
    REQUIRE(params.scale.rows == 2);
    REQUIRE(params.scale.cols == 6);
    double sum = 0.0;
    for (double a : params.alpha) {
      CHECK(a >= 0.0);
      sum += a;
    }
    CHECK(sum == Approx(1.0).margin(1e-9));
    for (double s : params.scale.data) CHECK(s > 0.0);
  }

  SimilarityFeature wrong = phi;
  wrong.values.pop_back();
  CHECK_THROWS_AS(forward(model, wrong, RunMode::eval, rng), std::invalid_argument);
}

TEST_CASE("zeroed output heads give uniform alpha and unit scale") {
  Rng init_rng(11);
  MdnModel model = init_model(small_config(DistFamily::normal, 4, 4), TrainConfig{}, init_rng);
  for (DenseLayer* head : {&model.head_mu, &model.head_scale, &model.head_alpha}) {
    for (double& v : head->w.data) v = 0.0;
    for (double& v : head->b) v = 0.0;
  }
  Rng rng(1);
  const MixtureParams params = forward(model, make_phi(rng, 4), RunMode::eval, rng);
  for (double a : params.alpha) CHECK(a == 0.25);
  for (double m : params.mu.data) CHECK(m == 0.0);
  for (double s : params.scale.data) CHECK(s == 1.0 + model.train_echo.scale_floor);
}

TEST_CASE("eval-mode forward is deterministic") {
  Rng init_rng(7);
  MdnModel model = init_model(small_config(DistFamily::laplace), TrainConfig{}, init_rng);
  Rng rng(9);
  const SimilarityFeature phi = make_phi(rng, 4);
  const MixtureParams a = forward_eval(model, phi);
  const MixtureParams b = forward_eval(model, phi);
  CHECK(a.alpha == b.alpha);
  CHECK(a.mu.data == b.mu.data);
  CHECK(a.scale.data == b.scale.data);
}

TEST_CASE("component log density closed forms") {
  {
    const std::vector<double> w{0.7, -0.4}, mu{0.7, -0.4}, sigma{1.0, 1.0};
    const double got = component_log_density(DistFamily::normal, w, mu, sigma);
    CHECK(got == Approx(-std::log(2.0 * std::numbers::pi)).margin(1e-12));
    CHECK(got == Approx(-1.8379).epsilon(1e-4));
  }
  {
    const std::vector<double> w{0.3}, mu{0.3}, b{0.5};
    CHECK(component_log_density(DistFamily::laplace, w, mu, b) == Approx(0.0).margin(1e-12));
  }
  const std::vector<double> w{0.0}, mu{0.0}, bad{0.0};
  CHECK_THROWS_AS(component_log_density(DistFamily::normal, w, mu, bad),
                  std::invalid_argument);
}

TEST_CASE("component log density matches the product-of-densities oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng.uniform_below(6);
    std::vector<double> w(dim), mu(dim), scale(dim);
    for (std::size_t m = 0; m < dim; ++m) {
      w[m] = rng.uniform_range(-2.0, 2.0);
      mu[m] = rng.uniform_range(-2.0, 2.0);
      scale[m] = rng.uniform_range(0.4, 2.0);
    }
    double normal_prod = 1.0, laplace_prod = 1.0;
    for (std::size_t m = 0; m < dim; ++m) {
      normal_prod *= oracles::naive_normal_density(w[m], mu[m], scale[m]);
      laplace_prod *= oracles::naive_laplace_density(w[m], mu[m], scale[m]);
    }
    CHECK(component_log_density(DistFamily::normal, w, mu, scale) ==
          Approx(std::log(normal_prod)).margin(1e-10));
    CHECK(component_log_density(DistFamily::laplace, w, mu, scale) ==
          Approx(std::log(laplace_prod)).margin(1e-10));
  }
}

TEST_CASE("nll closed forms") {
  {
    MixtureParams p = make_params(DistFamily::normal, {1.0}, Matrix(1, 2, 0.25),
                                  Matrix(1, 2, 1.0));
    const double loss = nll_loss({p}, {{0.25, 0.25}});
    CHECK(loss == Approx(std::log(2.0 * std::numbers::pi)).margin(1e-10));
  }
  {
    MixtureParams p = make_params(DistFamily::laplace, {1.0}, Matrix(1, 1, -0.75),
                                  Matrix(1, 1, 0.5));
    CHECK(nll_loss({p}, {{-0.75}}) == Approx(0.0).margin(1e-10));
  }
  {
    // two identical components collapse to the single-component loss
    MixtureParams one = make_params(DistFamily::normal, {1.0}, Matrix(1, 2, 0.1),
                                    Matrix(1, 2, 1.3));
    MixtureParams two = make_params(DistFamily::normal, {0.5, 0.5}, Matrix(2, 2, 0.1),
                                    Matrix(2, 2, 1.3));
    CHECK(nll_loss({two}, {{0.6, -0.2}}) ==
          Approx(nll_loss({one}, {{0.6, -0.2}})).margin(1e-12));
  }
  CHECK_THROWS_AS(nll_loss({}, {}), std::invalid_argument);
}

TEST_CASE("log-sum-exp path equals naive summation at moderate magnitudes") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t q_count = 1 + rng.uniform_below(3);
    const std::size_t dim = 1 + rng.uniform_below(4);
    const DistFamily family = trial % 2 ? DistFamily::normal : DistFamily::laplace;
    std::vector<double> alpha(q_count);
    double norm = 0.0;
    for (auto& a : alpha) {
      a = rng.uniform_range(0.1, 1.0);
      norm += a;
    }
    for (auto& a : alpha) a /= norm;
    Matrix mu(q_count, dim), scale(q_count, dim);
    for (auto& v : mu.data) v = rng.uniform_range(-2.0, 2.0);
    for (auto& v : scale.data) v = rng.uniform_range(0.5, 2.0);
    std::vector<double> w(dim);
    for (auto& v : w) v = rng.uniform_range(-2.0, 2.0);

    MixtureParams p = make_params(family, alpha, mu, scale);
    double naive = 0.0;
    for (std::size_t q = 0; q < q_count; ++q) {
      double prod = 1.0;
      for (std::size_t m = 0; m < dim; ++m)
        prod *= family == DistFamily::normal
                    ? oracles::naive_normal_density(w[m], mu(q, m), scale(q, m))
                    : oracles::naive_laplace_density(w[m], mu(q, m), scale(q, m));
      naive += alpha[q] * prod;
    }
    CHECK(nll_loss({p}, {w}) == Approx(-std::log(naive)).margin(1e-8));
  }
}

TEST_CASE("nll is invariant under component relabelling") {
  Rng rng(41);
  Matrix mu(3, 4), scale(3, 4);
  for (auto& v : mu.data) v = rng.uniform_range(-2.0, 2.0);
  for (auto& v : scale.data) v = rng.uniform_range(0.5, 2.0);
  std::vector<double> w{0.3, -0.8, 1.2, 0.0};
  MixtureParams p = make_params(DistFamily::laplace, {0.2, 0.5, 0.3}, mu, scale);

  Matrix mu_perm(3, 4), scale_perm(3, 4);
  const std::size_t perm[3] = {2, 0, 1};
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t m = 0; m < 4; ++m) {
      mu_perm(q, m) = mu(perm[q], m);
      scale_perm(q, m) = scale(perm[q], m);
    }
  MixtureParams shuffled =
      make_params(DistFamily::laplace, {0.3, 0.2, 0.5}, mu_perm, scale_perm);
  CHECK(nll_loss({p}, {w}) == Approx(nll_loss({shuffled}, {w})).margin(1e-12));
}

TEST_CASE("laplace density integrates to one") {
  // Simpson on both half-lines around the kink at mu.
  const double mu = 0.7, b = 0.6;
  auto density = [&](double x) { return std::exp(-std::abs(x - mu) / b) / (2.0 * b); };
  auto simpson = [&](double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double acc = density(lo) + density(hi);
    for (int i = 1; i < n; ++i) acc += density(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  const double integral =
      simpson(mu - 40.0 * b, mu, 20000) + simpson(mu, mu + 40.0 * b, 20000);
  CHECK(integral == Approx(1.0).margin(1e-6));
}

TEST_CASE("analytic gradients match central finite differences") {
  for (DistFamily family : {DistFamily::normal, DistFamily::laplace}) {
    const auto result = gradcheck::run_fixture(family, family == DistFamily::normal ? 17 : 18);
    INFO("family " << family_name(family));
    CHECK(result.params_checked > 300);
    CHECK(result.max_rel_err <= 1e-4);
  }
}

TEST_CASE("training lowers the loss on a single pair") {
  Rng rng(51);
  const SimilarityFeature phi = make_phi(rng, 4);
  TrajectoryWeights w;
  w.wx = {1.0, -0.5, 0.25};
  w.wy = {0.0, 0.75, -1.0};
  std::vector<std::pair<SimilarityFeature, std::vector<TrajectoryWeights>>> data{{phi, {w}}};

  MdnConfig cfg = small_config(DistFamily::normal, 4, 1);
  TrainConfig tc;
  tc.epochs = 200;  // batch of one -> 200 steps
  tc.batch_size = 1;
  tc.seed = 99;

  Rng init_rng(tc.seed);
  MdnModel before = init_model(cfg, tc, init_rng);
  const double initial = nll_loss({forward_eval(before, phi)}, {w.concatenated()});

  MdnModel after = train(data, cfg, tc);
  const double final_loss = nll_loss({forward_eval(after, phi)}, {w.concatenated()});
  CHECK(std::isfinite(after.final_train_nll));
  CHECK(final_loss < initial);
}

TEST_CASE("training is bit-reproducible from the seed") {
  Rng rng(61);
  std::vector<std::pair<SimilarityFeature, std::vector<TrajectoryWeights>>> data;
  for (int n = 0; n < 3; ++n) {
    TrajectoryWeights w1, w2;
    for (int m = 0; m < 3; ++m) {
      w1.wx.push_back(rng.uniform_range(-1, 1));
      w1.wy.push_back(rng.uniform_range(-1, 1));
      w2.wx.push_back(rng.uniform_range(-1, 1));
      w2.wy.push_back(rng.uniform_range(-1, 1));
    }
    data.push_back({make_phi(rng, 3), {w1, w2}});
  }
  MdnConfig cfg = small_config(DistFamily::laplace, 3, 2);
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 2;
  tc.seed = 1234;

  const MdnModel a = train(data, cfg, tc);
  const MdnModel b = train(data, cfg, tc);
  REQUIRE(a.hidden.size() == b.hidden.size());
  for (std::size_t i = 0; i < a.hidden.size(); ++i) {
    CHECK(a.hidden[i].w.data == b.hidden[i].w.data);
    CHECK(a.hidden[i].b == b.hidden[i].b);
  }
  CHECK(a.bn.running_mean == b.bn.running_mean);
  CHECK(a.bn.running_var == b.bn.running_var);
  CHECK(a.head_mu.w.data == b.head_mu.w.data);
  CHECK(a.head_scale.w.data == b.head_scale.w.data);
  CHECK(a.head_alpha.w.data == b.head_alpha.w.data);
  CHECK(a.final_train_nll == b.final_train_nll);

  TrainConfig bad = tc;
  bad.epochs = 0;
  CHECK_THROWS_AS(train(data, cfg, bad), std::invalid_argument);
  CHECK_THROWS_AS(train({}, cfg, tc), std::invalid_argument);
}

TEST_CASE("sampling follows the mixture") {
  Rng rng(71);
  {
    // near-degenerate scales collapse onto the mean
    Matrix mu(1, 4);
    mu.data = {0.5, -1.5, 2.0, 0.0};
    MixtureParams p = make_params(DistFamily::normal, {1.0}, mu, Matrix(1, 4, 1e-6));
    const std::vector<double> s = sample_weights(p, rng);
    for (std::size_t m = 0; m < 4; ++m) CHECK(s[m] == Approx(mu.data[m]).margin(1e-4));

    p.family = DistFamily::laplace;
    const std::vector<double> sl = sample_weights(p, rng);
    for (std::size_t m = 0; m < 4; ++m) CHECK(sl[m] == Approx(mu.data[m]).margin(1e-4));
  }
  {
    // component selection frequencies track alpha (4 standard errors)
    Matrix mu(3, 1), scale(3, 1, 1e-9);
    mu.data = {-10.0, 0.0, 10.0};
    const std::vector<double> alpha{0.2, 0.5, 0.3};
    MixtureParams p = make_params(DistFamily::normal, alpha, mu, scale);
    const int draws = 20000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < draws; ++i) {
      const double v = sample_weights(p, rng)[0];
      counts[v < -5.0 ? 0 : (v < 5.0 ? 1 : 2)]++;
    }
    for (int q = 0; q < 3; ++q) {
      const double freq = static_cast<double>(counts[q]) / draws;
      const double se = std::sqrt(alpha[q] * (1.0 - alpha[q]) / draws);
      CHECK(std::abs(freq - alpha[q]) <= 4.0 * se);
    }
  }
}

TEST_CASE("model files round-trip exactly") {
  Rng rng(81);
  std::vector<std::pair<SimilarityFeature, std::vector<TrajectoryWeights>>> data;
  TrajectoryWeights w;
  w.wx = {0.4, -0.2, 0.9};
  w.wy = {0.1, 0.3, -0.5};
  data.push_back({make_phi(rng, 2), {w}});
  data.push_back({make_phi(rng, 2), {w}});

  MdnConfig cfg = small_config(DistFamily::normal, 2, 2);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 2;
  MdnModel model = train(data, cfg, tc);
  model.basis = BasisConfig::make(3, 0.2);
  model.ridge = RidgeConfig{1e-4};
  model.kernel = KernelConfig{50.0};
  model.training_maps = {{{0.5, 0.5}}, {{1.5, 0.5}, {2.5, 2.5}}};
  model.training_map_ids = {"map_000", "map_001"};

  const auto dir = std::filesystem::path("scratch_mdn");
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.json").string();
  save_model(model, path);
  const MdnModel loaded = load_model(path);

  const SimilarityFeature phi = make_phi(rng, 2);
  const MixtureParams a = forward_eval(model, phi);
  const MixtureParams b = forward_eval(loaded, phi);
  CHECK(a.alpha == b.alpha);
  CHECK(a.mu.data == b.mu.data);
  CHECK(a.scale.data == b.scale.data);
  CHECK(loaded.training_maps.size() == 2);
  CHECK(loaded.training_maps[1][1].x == 2.5);
  CHECK(loaded.final_train_nll == model.final_train_nll);

  // version and shape tampering are rejected
  nlohmann::json doc;
  {
    std::ifstream in(path);
    in >> doc;
  }
  nlohmann::json bad_version = doc;
  bad_version["format_version"] = 999;
  {
    std::ofstream out(dir / "bad_version.json");
    out << bad_version.dump();
  }
  CHECK_THROWS_AS(load_model((dir / "bad_version.json").string()), io_error);

  nlohmann::json bad_shape = doc;
  bad_shape["hidden_layers"][0]["b"].erase(0);
  {
    std::ofstream out(dir / "bad_shape.json");
    out << bad_shape.dump();
  }
  CHECK_THROWS_AS(load_model((dir / "bad_shape.json").string()), io_error);

  {
    std::ofstream out(dir / "truncated.json");
    out << doc.dump().substr(0, 500);
  }
  CHECK_THROWS_AS(load_model((dir / "truncated.json").string()), io_error);
  CHECK_THROWS_AS(load_model((dir / "missing.json").string()), io_error);
}
