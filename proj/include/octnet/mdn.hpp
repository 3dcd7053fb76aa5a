#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "octnet/embedding.hpp"
#include "octnet/errors.hpp"
#include "octnet/geometry.hpp"
#include "octnet/hausdorff.hpp"
#include "octnet/linalg.hpp"
#include "octnet/rng.hpp"

namespace octnet {

enum class DistFamily { normal, laplace };

inline const char* family_name(DistFamily f) {
  return f == DistFamily::normal ? "normal" : "laplace";
}

inline DistFamily family_from_name(const std::string& name) {
  if (name == "normal") return DistFamily::normal;
  if (name == "laplace") return DistFamily::laplace;
  throw std::invalid_argument("unknown distribution family: " + name);
}

enum class RunMode { train, eval };

/// Architecture of the density network: a stack of ReLU dense layers with
/// batch normalisation after the first and dropout after the middle ones,
/// feeding three heads (means, exponential-activated scales, softmax
/// component weights).
struct MdnConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_sizes = {500, 500, 500, 500, 500};
  bool batch_norm_after_layer1 = true;
  double dropout_rate = 0.25;  // applied after hidden layers 2 .. H-1
  std::size_t num_components = 6;
  std::size_t weight_dim = 20;  // 2M
  DistFamily family = DistFamily::normal;

  void validate() const {
    if (input_dim < 1) throw std::invalid_argument("MdnConfig: input_dim must be >= 1");
    if (hidden_sizes.empty()) throw std::invalid_argument("MdnConfig: no hidden layers");
    for (auto s : hidden_sizes)
      if (s < 1) throw std::invalid_argument("MdnConfig: hidden size must be >= 1");
    if (num_components < 1) throw std::invalid_argument("MdnConfig: num_components must be >= 1");
    if (weight_dim < 2 || weight_dim % 2 != 0)
      throw std::invalid_argument("MdnConfig: weight_dim must be positive and even");
    if (!(dropout_rate >= 0.0) || dropout_rate >= 1.0)
      throw std::invalid_argument("MdnConfig: dropout_rate must be in [0,1)");
  }
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
  double scale_floor = 1e-6;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: bad learning rate");
    if (!(scale_floor > 0.0)) throw std::invalid_argument("TrainConfig: scale_floor must be > 0");
  }
};

/// One conditional mixture: component weights on the simplex, per-component
/// element-wise means and strictly positive scales (sigma or b).
struct MixtureParams {
  DistFamily family = DistFamily::normal;
  std::vector<double> alpha;  // Q
  Matrix mu;                  // Q x 2M
  Matrix scale;               // Q x 2M
};

struct DenseLayer {
  Matrix w;  // out x in
  std::vector<double> b;
};

struct BatchNorm {
  std::vector<double> gamma, beta, running_mean, running_var;
  double momentum = 0.9;
  double eps = 1e-5;
};

struct MdnModel {
  static constexpr int kFormatVersion = 1;

  MdnConfig config;
  std::vector<DenseLayer> hidden;
  BatchNorm bn;
  DenseLayer head_mu, head_scale, head_alpha;

  // Everything a query needs to go from a raw map to a sampled trajectory.
  BasisConfig basis;
  RidgeConfig ridge;
  KernelConfig kernel;
  std::vector<PointSet> training_maps;
  std::vector<std::string> training_map_ids;

  TrainConfig train_echo;
  double final_train_nll = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void add_bias_rows(Matrix& z, const std::vector<double>& b) {
  for (std::size_t i = 0; i < z.rows; ++i) {
    double* row = z.row_ptr(i);
    for (std::size_t j = 0; j < z.cols; ++j) row[j] += b[j];
  }
}

inline std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> s(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols; ++j) s[j] += row[j];
  }
  return s;
}

inline double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;  // all -inf (or a NaN/inf propagates)
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace detail

/// Everything backward() needs from a forward pass.
struct ForwardCache {
  RunMode mode = RunMode::eval;
  Matrix input;                     // B x N
  std::vector<Matrix> layer_in;     // input of dense layer i
  std::vector<Matrix> pre_act;      // z_i before ReLU
  std::vector<Matrix> dropout_mask; // per layer; empty when inactive
  Matrix bn_in;                     // input of batch norm (layer-1 ReLU out)
  Matrix bn_xhat;
  std::vector<double> bn_mean, bn_var;  // statistics actually used
  Matrix last_hidden;               // input of the heads
  Matrix alpha_logits, alpha;       // B x Q
  Matrix mu;                        // B x (Q*2M), component-major
  Matrix scale_pre, scale;          // B x (Q*2M)
};

namespace detail {

inline Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
  Matrix z = matmul_nt(x, layer.w);
  add_bias_rows(z, layer.b);
  return z;
}

inline void batch_norm_forward(MdnModel& model, RunMode mode, Matrix& a, ForwardCache& cache) {
  BatchNorm& bn = model.bn;
  const std::size_t batch = a.rows, feat = a.cols;
  cache.bn_in = a;
  std::vector<double> mean(feat, 0.0), var(feat, 0.0);
  if (mode == RunMode::train) {
    for (std::size_t j = 0; j < feat; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < batch; ++i) m += a(i, j);
      m /= static_cast<double>(batch);
      double v = 0.0;
      for (std::size_t i = 0; i < batch; ++i) {
        const double d = a(i, j) - m;
        v += d * d;
      }
      v /= static_cast<double>(batch);
      mean[j] = m;
      var[j] = v;
      bn.running_mean[j] = bn.momentum * bn.running_mean[j] + (1.0 - bn.momentum) * m;
      bn.running_var[j] = bn.momentum * bn.running_var[j] + (1.0 - bn.momentum) * v;
    }
  } else {
    mean = bn.running_mean;
    var = bn.running_var;
  }
  cache.bn_mean = mean;
  cache.bn_var = var;
  cache.bn_xhat = Matrix(batch, feat);
  for (std::size_t j = 0; j < feat; ++j) {
    const double istd = 1.0 / std::sqrt(var[j] + bn.eps);
    for (std::size_t i = 0; i < batch; ++i) {
      const double xhat = (a(i, j) - mean[j]) * istd;
      cache.bn_xhat(i, j) = xhat;
      a(i, j) = bn.gamma[j] * xhat + bn.beta[j];
    }
  }
}

}  // namespace detail

/// Batched forward pass. Train mode draws dropout masks from `rng`, uses
/// batch statistics in the batch-norm layer and updates its running
/// statistics; eval mode is deterministic and leaves the model untouched.
inline void forward_batch(MdnModel& model, const Matrix& phi, RunMode mode, Rng* rng,
                          ForwardCache& cache) {
  const MdnConfig& cfg = model.config;
  if (phi.cols != cfg.input_dim)
    throw std::invalid_argument("forward: phi length does not match input_dim");
  if (mode == RunMode::train && cfg.dropout_rate > 0.0 && rng == nullptr)
    throw std::invalid_argument("forward: train mode needs an rng for dropout");

  const std::size_t layers = cfg.hidden_sizes.size();
  cache.mode = mode;
  cache.input = phi;
  cache.layer_in.assign(layers, Matrix{});
  cache.pre_act.assign(layers, Matrix{});
  cache.dropout_mask.assign(layers, Matrix{});

  Matrix a = phi;
  for (std::size_t i = 0; i < layers; ++i) {
    cache.layer_in[i] = a;
    Matrix z = detail::dense_forward(model.hidden[i], a);
    cache.pre_act[i] = z;
    for (double& v : z.data) v = v > 0.0 ? v : 0.0;  // ReLU
    a = std::move(z);
    if (i == 0 && cfg.batch_norm_after_layer1)
      detail::batch_norm_forward(model, mode, a, cache);
    const bool dropout_here =
        cfg.dropout_rate > 0.0 && i >= 1 && i + 1 < layers && mode == RunMode::train;
    if (dropout_here) {
      const double keep = 1.0 - cfg.dropout_rate;
      Matrix mask(a.rows, a.cols);
      for (std::size_t idx = 0; idx < a.data.size(); ++idx) {
        const double on = rng->uniform01() < keep ? 1.0 : 0.0;
        mask.data[idx] = on;
        a.data[idx] = a.data[idx] * on / keep;  // inverted dropout
      }
      cache.dropout_mask[i] = std::move(mask);
    }
  }
  cache.last_hidden = a;

  cache.alpha_logits = detail::dense_forward(model.head_alpha, a);
  cache.mu = detail::dense_forward(model.head_mu, a);
  cache.scale_pre = detail::dense_forward(model.head_scale, a);

  // softmax rows
  cache.alpha = Matrix(cache.alpha_logits.rows, cache.alpha_logits.cols);
  for (std::size_t i = 0; i < cache.alpha_logits.rows; ++i) {
    const double* zr = cache.alpha_logits.row_ptr(i);
    double* ar = cache.alpha.row_ptr(i);
    double mx = zr[0];
    for (std::size_t q = 1; q < cache.alpha_logits.cols; ++q) mx = std::max(mx, zr[q]);
    double sum = 0.0;
    for (std::size_t q = 0; q < cache.alpha_logits.cols; ++q) {
      ar[q] = std::exp(zr[q] - mx);
      sum += ar[q];
    }
    for (std::size_t q = 0; q < cache.alpha_logits.cols; ++q) ar[q] /= sum;
  }

  // exponential activation with a positive floor
  const double floor = model.train_echo.scale_floor;
  cache.scale = Matrix(cache.scale_pre.rows, cache.scale_pre.cols);
  for (std::size_t idx = 0; idx < cache.scale_pre.data.size(); ++idx)
    cache.scale.data[idx] = std::exp(cache.scale_pre.data[idx]) + floor;

  for (double v : cache.alpha.data)
    if (!std::isfinite(v)) throw numeric_error("forward: non-finite mixture weight");
  for (double v : cache.mu.data)
    if (!std::isfinite(v)) throw numeric_error("forward: non-finite mean activation");
  for (double v : cache.scale.data)
    if (!std::isfinite(v)) throw numeric_error("forward: non-finite scale activation");
}

inline MixtureParams extract_params(const MdnModel& model, const ForwardCache& cache,
                                    std::size_t row) {
  const std::size_t q_count = model.config.num_components;
  const std::size_t dim = model.config.weight_dim;
  MixtureParams params;
  params.family = model.config.family;
  params.alpha.assign(cache.alpha.row_ptr(row), cache.alpha.row_ptr(row) + q_count);
  params.mu = Matrix(q_count, dim);
  params.scale = Matrix(q_count, dim);
  for (std::size_t q = 0; q < q_count; ++q)
    for (std::size_t m = 0; m < dim; ++m) {
      params.mu(q, m) = cache.mu(row, q * dim + m);
      params.scale(q, m) = cache.scale(row, q * dim + m);
    }
  return params;
}

/// Single-query forward. Train mode uses B = 1 batch statistics and mutates
/// the running batch-norm statistics, so it takes the model by reference.
inline MixtureParams forward(MdnModel& model, const SimilarityFeature& phi, RunMode mode,
                             Rng& rng) {
  Matrix x(1, phi.values.size());
  std::copy(phi.values.begin(), phi.values.end(), x.data.begin());
  ForwardCache cache;
  forward_batch(model, x, mode, &rng, cache);
  return extract_params(model, cache, 0);
}

/// Deterministic eval-mode forward on a frozen model.
inline MixtureParams forward_eval(const MdnModel& model, const SimilarityFeature& phi) {
  Matrix x(1, phi.values.size());
  std::copy(phi.values.begin(), phi.values.end(), x.data.begin());
  ForwardCache cache;
  forward_batch(const_cast<MdnModel&>(model), x, RunMode::eval, nullptr, cache);
  return extract_params(model, cache, 0);
}

/// Log density of one mixture component, summed over the elements of w.
inline double component_log_density(DistFamily family, std::span<const double> w,
                                    std::span<const double> mu, std::span<const double> scale) {
  if (w.size() != mu.size() || w.size() != scale.size())
    throw std::invalid_argument("component_log_density: size mismatch");
  double acc = 0.0;
  if (family == DistFamily::normal) {
    for (std::size_t m = 0; m < w.size(); ++m) {
      const double sigma = scale[m];
      if (!(sigma > 0.0)) throw std::invalid_argument("component_log_density: non-positive scale");
      const double r = w[m] - mu[m];
      acc += -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) -
             (r * r) / (2.0 * sigma * sigma);
    }
  } else {
    for (std::size_t m = 0; m < w.size(); ++m) {
      const double b = scale[m];
      if (!(b > 0.0)) throw std::invalid_argument("component_log_density: non-positive scale");
      acc += -std::log(2.0 * b) - std::abs(w[m] - mu[m]) / b;
    }
  }
  return acc;
}

/// Mean negative log-likelihood of the batch under the predicted mixtures,
/// reduced through log-sum-exp.
inline double nll_loss(const std::vector<MixtureParams>& params_batch,
                       const std::vector<std::vector<double>>& w_batch) {
  if (params_batch.empty()) throw std::invalid_argument("nll_loss: empty batch");
  if (params_batch.size() != w_batch.size())
    throw std::invalid_argument("nll_loss: batch size mismatch");
  double total = 0.0;
  std::vector<double> terms;
  for (std::size_t i = 0; i < params_batch.size(); ++i) {
    const MixtureParams& p = params_batch[i];
    const std::vector<double>& w = w_batch[i];
    terms.assign(p.alpha.size(), 0.0);
    for (std::size_t q = 0; q < p.alpha.size(); ++q) {
      const std::span<const double> mu(p.mu.row_ptr(q), p.mu.cols);
      const std::span<const double> scale(p.scale.row_ptr(q), p.scale.cols);
      terms[q] = std::log(p.alpha[q]) + component_log_density(p.family, w, mu, scale);
    }
    total += -detail::log_sum_exp(terms);
  }
  return total / static_cast<double>(params_batch.size());
}

/// Loss together with its gradient at the three head outputs.
struct HeadGrads {
  double loss = 0.0;
  Matrix d_alpha_logits;  // B x Q
  Matrix d_mu;            // B x Q*2M
  Matrix d_scale_pre;     // B x Q*2M
};

/// Computes the batch-mean NLL directly from the cached head activations
/// and differentiates it with respect to the head pre-activations.
/// Gradients are exact for the log-sum-exp formulation:
///   dL/dz_q        = alpha_q - r_q            (softmax logits)
///   dL/dmu_{q,m}   = -r_q * dlogp/dmu
///   dL/dupre_{q,m} = -r_q * dlogp/dscale * exp(upre)
/// with r_q the posterior component responsibility.
inline HeadGrads nll_head_grads(const ForwardCache& cache, const Matrix& targets,
                                DistFamily family, std::size_t q_count, std::size_t dim) {
  const std::size_t batch = cache.alpha.rows;
  if (targets.rows != batch || targets.cols != dim)
    throw std::invalid_argument("nll_head_grads: target shape mismatch");
  HeadGrads out;
  out.d_alpha_logits = Matrix(batch, q_count, 0.0);
  out.d_mu = Matrix(batch, q_count * dim, 0.0);
  out.d_scale_pre = Matrix(batch, q_count * dim, 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch);

  std::vector<double> g(q_count);
  for (std::size_t i = 0; i < batch; ++i) {
    const double* logits = cache.alpha_logits.row_ptr(i);
    const double logit_lse = detail::log_sum_exp({logits, q_count});
    for (std::size_t q = 0; q < q_count; ++q) {
      double lp = 0.0;
      if (family == DistFamily::normal) {
        for (std::size_t m = 0; m < dim; ++m) {
          const double sigma = cache.scale(i, q * dim + m);
          const double r = targets(i, m) - cache.mu(i, q * dim + m);
          lp += -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) -
                (r * r) / (2.0 * sigma * sigma);
        }
      } else {
        for (std::size_t m = 0; m < dim; ++m) {
          const double b = cache.scale(i, q * dim + m);
          lp += -std::log(2.0 * b) - std::abs(targets(i, m) - cache.mu(i, q * dim + m)) / b;
        }
      }
      g[q] = (logits[q] - logit_lse) + lp;
    }
    const double lse = detail::log_sum_exp(g);
    out.loss += -lse * inv_batch;

    for (std::size_t q = 0; q < q_count; ++q) {
      const double resp = std::exp(g[q] - lse);
      out.d_alpha_logits(i, q) = (cache.alpha(i, q) - resp) * inv_batch;
      for (std::size_t m = 0; m < dim; ++m) {
        const std::size_t col = q * dim + m;
        const double res = targets(i, m) - cache.mu(i, col);
        const double s = cache.scale(i, col);
        double dmu, dscale;
        if (family == DistFamily::normal) {
          dmu = -resp * (res / (s * s));
          dscale = -resp * (-1.0 / s + (res * res) / (s * s * s));
        } else {
          const double sign = res > 0.0 ? 1.0 : (res < 0.0 ? -1.0 : 0.0);
          dmu = -resp * (sign / s);
          dscale = -resp * (-1.0 / s + std::abs(res) / (s * s));
        }
        out.d_mu(i, col) = dmu * inv_batch;
        out.d_scale_pre(i, col) = dscale * std::exp(cache.scale_pre(i, col)) * inv_batch;
      }
    }
  }
  return out;
}

struct Gradients {
  std::vector<Matrix> hidden_w;
  std::vector<std::vector<double>> hidden_b;
  std::vector<double> bn_gamma, bn_beta;
  Matrix mu_w, scale_w, alpha_w;
  std::vector<double> mu_b, scale_b, alpha_b;
};

namespace detail {

inline Matrix dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& dz,
                             Matrix& dw, std::vector<double>& db) {
  dw = matmul_tn(dz, x);  // out x in
  db = column_sums(dz);
  return matmul(dz, layer.w);  // B x in
}

inline Matrix batch_norm_backward(const MdnModel& model, const ForwardCache& cache,
                                  const Matrix& dy, std::vector<double>& dgamma,
                                  std::vector<double>& dbeta) {
  const BatchNorm& bn = model.bn;
  const std::size_t batch = dy.rows, feat = dy.cols;
  dgamma.assign(feat, 0.0);
  dbeta.assign(feat, 0.0);
  Matrix dx(batch, feat, 0.0);
  for (std::size_t j = 0; j < feat; ++j) {
    const double istd = 1.0 / std::sqrt(cache.bn_var[j] + bn.eps);
    double dg = 0.0, db = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      dg += dy(i, j) * cache.bn_xhat(i, j);
      db += dy(i, j);
    }
    dgamma[j] = dg;
    dbeta[j] = db;
    if (cache.mode == RunMode::eval) {
      // frozen statistics: a plain affine map
      for (std::size_t i = 0; i < batch; ++i) dx(i, j) = dy(i, j) * bn.gamma[j] * istd;
      continue;
    }
    const double inv_b = 1.0 / static_cast<double>(batch);
    double dvar = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      const double xc = cache.bn_in(i, j) - cache.bn_mean[j];
      dvar += dy(i, j) * bn.gamma[j] * xc;
    }
    dvar *= -0.5 * istd * istd * istd;
    double dmean = 0.0, sum_xc = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      dmean += -dy(i, j) * bn.gamma[j] * istd;
      sum_xc += cache.bn_in(i, j) - cache.bn_mean[j];
    }
    dmean += dvar * (-2.0 * sum_xc * inv_b);
    for (std::size_t i = 0; i < batch; ++i) {
      const double xc = cache.bn_in(i, j) - cache.bn_mean[j];
      dx(i, j) = dy(i, j) * bn.gamma[j] * istd + dvar * 2.0 * xc * inv_b + dmean * inv_b;
    }
  }
  return dx;
}

}  // namespace detail

/// Reverse-mode pass through the head and hidden stack. Works for both
/// modes: train mode differentiates through the batch statistics, eval
/// mode treats batch norm as a fixed affine map.
inline Gradients backward(const MdnModel& model, const ForwardCache& cache,
                          const HeadGrads& head) {
  const MdnConfig& cfg = model.config;
  const std::size_t layers = cfg.hidden_sizes.size();
  Gradients grads;
  grads.hidden_w.resize(layers);
  grads.hidden_b.resize(layers);

  Matrix d_hidden = detail::dense_backward(model.head_alpha, cache.last_hidden,
                                           head.d_alpha_logits, grads.alpha_w, grads.alpha_b);
  {
    Matrix d_mu_in = detail::dense_backward(model.head_mu, cache.last_hidden, head.d_mu,
                                            grads.mu_w, grads.mu_b);
    Matrix d_scale_in = detail::dense_backward(model.head_scale, cache.last_hidden,
                                               head.d_scale_pre, grads.scale_w, grads.scale_b);
    for (std::size_t idx = 0; idx < d_hidden.data.size(); ++idx)
      d_hidden.data[idx] += d_mu_in.data[idx] + d_scale_in.data[idx];
  }

  for (std::size_t i = layers; i-- > 0;) {
    if (!cache.dropout_mask[i].data.empty()) {
      const double keep = 1.0 - cfg.dropout_rate;
      for (std::size_t idx = 0; idx < d_hidden.data.size(); ++idx)
        d_hidden.data[idx] *= cache.dropout_mask[i].data[idx] / keep;
    }
    if (i == 0 && cfg.batch_norm_after_layer1)
      d_hidden = detail::batch_norm_backward(model, cache, d_hidden, grads.bn_gamma,
                                             grads.bn_beta);
    for (std::size_t idx = 0; idx < d_hidden.data.size(); ++idx)
      if (!(cache.pre_act[i].data[idx] > 0.0)) d_hidden.data[idx] = 0.0;  // ReLU gate
    d_hidden = detail::dense_backward(model.hidden[i], cache.layer_in[i], d_hidden,
                                      grads.hidden_w[i], grads.hidden_b[i]);
  }
  return grads;
}

namespace detail {

struct ParamView {
  double* data;
  std::size_t size;
};

/// Parameter tensors in a single fixed order; Adam state and gradient
/// application both rely on this ordering.
inline std::vector<ParamView> parameter_views(MdnModel& model) {
  std::vector<ParamView> views;
  for (auto& layer : model.hidden) {
    views.push_back({layer.w.data.data(), layer.w.data.size()});
    views.push_back({layer.b.data(), layer.b.size()});
  }
  if (model.config.batch_norm_after_layer1) {
    views.push_back({model.bn.gamma.data(), model.bn.gamma.size()});
    views.push_back({model.bn.beta.data(), model.bn.beta.size()});
  }
  for (DenseLayer* head : {&model.head_mu, &model.head_scale, &model.head_alpha}) {
    views.push_back({head->w.data.data(), head->w.data.size()});
    views.push_back({head->b.data(), head->b.size()});
  }
  return views;
}

inline std::vector<ParamView> gradient_views(Gradients& grads, const MdnModel& model) {
  std::vector<ParamView> views;
  for (std::size_t i = 0; i < grads.hidden_w.size(); ++i) {
    views.push_back({grads.hidden_w[i].data.data(), grads.hidden_w[i].data.size()});
    views.push_back({grads.hidden_b[i].data(), grads.hidden_b[i].size()});
  }
  if (model.config.batch_norm_after_layer1) {
    views.push_back({grads.bn_gamma.data(), grads.bn_gamma.size()});
    views.push_back({grads.bn_beta.data(), grads.bn_beta.size()});
  }
  for (auto pair : {std::pair{&grads.mu_w, &grads.mu_b},
                    std::pair{&grads.scale_w, &grads.scale_b},
                    std::pair{&grads.alpha_w, &grads.alpha_b}}) {
    views.push_back({pair.first->data.data(), pair.first->data.size()});
    views.push_back({pair.second->data(), pair.second->size()});
  }
  return views;
}

struct AdamState {
  std::vector<std::vector<double>> m, v;
  long step = 0;

  void init(const std::vector<ParamView>& params) {
    m.clear();
    v.clear();
    for (const auto& p : params) {
      m.emplace_back(p.size, 0.0);
      v.emplace_back(p.size, 0.0);
    }
  }

  void apply(std::vector<ParamView>& params, std::vector<ParamView>& grads,
             const TrainConfig& cfg) {
    ++step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t p = 0; p < params.size(); ++p) {
      double* w = params[p].data;
      const double* g = grads[p].data;
      double* mp = m[p].data();
      double* vp = v[p].data();
      for (std::size_t k = 0; k < params[p].size; ++k) {
        mp[k] = cfg.beta1 * mp[k] + (1.0 - cfg.beta1) * g[k];
        vp[k] = cfg.beta2 * vp[k] + (1.0 - cfg.beta2) * g[k] * g[k];
        const double mhat = mp[k] / bc1;
        const double vhat = vp[k] / bc2;
        w[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
      }
    }
  }
};

inline DenseLayer init_dense(std::size_t out, std::size_t in, Rng& rng) {
  DenseLayer layer;
  layer.w = Matrix(out, in);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& v : layer.w.data) v = rng.uniform_range(-bound, bound);
  layer.b.assign(out, 0.0);
  return layer;
}

}  // namespace detail

/// Fresh model with fan-in-scaled uniform weights, zero biases and identity
/// batch-norm statistics, all drawn from the given generator.
inline MdnModel init_model(const MdnConfig& cfg, const TrainConfig& train_cfg, Rng& rng) {
  cfg.validate();
  MdnModel model;
  model.config = cfg;
  model.train_echo = train_cfg;
  std::size_t in = cfg.input_dim;
  for (std::size_t size : cfg.hidden_sizes) {
    model.hidden.push_back(detail::init_dense(size, in, rng));
    in = size;
  }
  if (cfg.batch_norm_after_layer1) {
    const std::size_t f = cfg.hidden_sizes[0];
    model.bn.gamma.assign(f, 1.0);
    model.bn.beta.assign(f, 0.0);
    model.bn.running_mean.assign(f, 0.0);
    model.bn.running_var.assign(f, 1.0);
  }
  const std::size_t last = cfg.hidden_sizes.back();
  model.head_mu = detail::init_dense(cfg.num_components * cfg.weight_dim, last, rng);
  model.head_scale = detail::init_dense(cfg.num_components * cfg.weight_dim, last, rng);
  model.head_alpha = detail::init_dense(cfg.num_components, last, rng);
  return model;
}

/// Trains on (phi, weight-vector) pairs flattened from the per-map dataset.
/// Mini-batch Adam over shuffled epochs; bit-reproducible from the seed.
/// Throws numeric_error as soon as a batch loss stops being finite.
inline MdnModel train(
    const std::vector<std::pair<SimilarityFeature, std::vector<TrajectoryWeights>>>& dataset,
    const MdnConfig& mdn_cfg, const TrainConfig& train_cfg) {
  train_cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  MdnConfig cfg = mdn_cfg;
  if (cfg.input_dim == 0) cfg.input_dim = dataset.front().first.values.size();
  cfg.validate();

  std::vector<const SimilarityFeature*> phis;
  std::vector<std::vector<double>> targets;
  for (const auto& [phi, weights] : dataset) {
    if (phi.values.size() != cfg.input_dim)
      throw std::invalid_argument("train: similarity feature length mismatch");
    for (const TrajectoryWeights& w : weights) {
      std::vector<double> flat = w.concatenated();
      if (flat.size() != cfg.weight_dim)
        throw std::invalid_argument("train: weight vector length mismatch");
      phis.push_back(&phi);
      targets.push_back(std::move(flat));
    }
  }
  if (targets.empty()) throw std::invalid_argument("train: no trajectories in dataset");

  Rng rng(train_cfg.seed);
  MdnModel model = init_model(cfg, train_cfg, rng);

  // Seed the component mean-head biases with spread-out target vectors
  // (greedy farthest-point pick after a random start). With all-zero
  // biases the components start indistinguishable and one of them absorbs
  // every responsibility within a few epochs, leaving a single wide
  // component; seeding them apart lets each settle on a route family.
  {
    std::vector<std::size_t> chosen{rng.uniform_below(targets.size())};
    while (chosen.size() < cfg.num_components) {
      std::size_t best_idx = 0;
      double best_dist = -1.0;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t c : chosen) {
          double d = 0.0;
          for (std::size_t m = 0; m < cfg.weight_dim; ++m) {
            const double diff = targets[i][m] - targets[c][m];
            d += diff * diff;
          }
          nearest = std::min(nearest, d);
        }
        if (nearest > best_dist) {
          best_dist = nearest;
          best_idx = i;
        }
      }
      chosen.push_back(best_idx);
    }
    for (std::size_t q = 0; q < cfg.num_components; ++q)
      for (std::size_t m = 0; m < cfg.weight_dim; ++m)
        model.head_mu.b[q * cfg.weight_dim + m] = targets[chosen[q % chosen.size()]][m];
  }

  auto params = detail::parameter_views(model);
  detail::AdamState adam;
  adam.init(params);

  std::vector<std::size_t> order(targets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t n = targets.size();
  double epoch_mean_nll = 0.0;
  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += train_cfg.batch_size) {
      const std::size_t batch = std::min(train_cfg.batch_size, n - start);
      Matrix phi_batch(batch, cfg.input_dim);
      Matrix w_batch(batch, cfg.weight_dim);
      for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t idx = order[start + i];
        std::copy(phis[idx]->values.begin(), phis[idx]->values.end(), phi_batch.row_ptr(i));
        std::copy(targets[idx].begin(), targets[idx].end(), w_batch.row_ptr(i));
      }
      ForwardCache cache;
      forward_batch(model, phi_batch, RunMode::train, &rng, cache);
      HeadGrads head = nll_head_grads(cache, w_batch, cfg.family, cfg.num_components,
                                      cfg.weight_dim);
      if (!std::isfinite(head.loss))
        throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                            ", batch offset " + std::to_string(start));
      Gradients grads = backward(model, cache, head);
      auto grad_views = detail::gradient_views(grads, model);
      adam.apply(params, grad_views, train_cfg);
      epoch_loss += head.loss * static_cast<double>(batch);
    }
    epoch_mean_nll = epoch_loss / static_cast<double>(n);
  }
  model.final_train_nll = epoch_mean_nll;
  return model;
}

/// Draws one weight vector: component by the alpha weights, then each
/// element independently from the component's marginal.
inline std::vector<double> sample_weights(const MixtureParams& params, Rng& rng) {
  if (params.alpha.empty()) throw std::invalid_argument("sample_weights: empty mixture");
  const double u = rng.uniform01();
  std::size_t q = params.alpha.size() - 1;
  double cum = 0.0;
  for (std::size_t i = 0; i < params.alpha.size(); ++i) {
    cum += params.alpha[i];
    if (u < cum) {
      q = i;
      break;
    }
  }
  std::vector<double> w(params.mu.cols);
  for (std::size_t m = 0; m < w.size(); ++m) {
    if (params.family == DistFamily::normal)
      w[m] = rng.normal(params.mu(q, m), params.scale(q, m));
    else
      w[m] = rng.laplace(params.mu(q, m), params.scale(q, m));
  }
  return w;
}

}  // namespace octnet
