#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "octnet/errors.hpp"
#include "octnet/mdn.hpp"

namespace octnet {

namespace detail {

using nlohmann::json;

inline json dense_to_json(const DenseLayer& layer) {
  return json{{"rows", layer.w.rows}, {"cols", layer.w.cols},
              {"w", layer.w.data}, {"b", layer.b}};
}

inline DenseLayer dense_from_json(const json& j, std::size_t rows, std::size_t cols,
                                  const std::string& what) {
  DenseLayer layer;
  layer.w.rows = j.at("rows").get<std::size_t>();
  layer.w.cols = j.at("cols").get<std::size_t>();
  layer.w.data = j.at("w").get<std::vector<double>>();
  layer.b = j.at("b").get<std::vector<double>>();
  if (layer.w.rows != rows || layer.w.cols != cols ||
      layer.w.data.size() != rows * cols || layer.b.size() != rows)
    throw io_error("model file: tensor shape mismatch in " + what);
  for (double v : layer.w.data)
    if (!std::isfinite(v)) throw io_error("model file: non-finite weight in " + what);
  for (double v : layer.b)
    if (!std::isfinite(v)) throw io_error("model file: non-finite bias in " + what);
  return layer;
}

}  // namespace detail

/// The model file is a JSON document holding the full configuration, the
/// frozen training-map point sets and every parameter tensor. Doubles are
/// written in shortest round-trip form, so save -> load is the identity.
inline void save_model(const MdnModel& model, const std::string& path) {
  using nlohmann::json;
  json j;
  j["format_version"] = MdnModel::kFormatVersion;
  j["family"] = family_name(model.config.family);
  j["mdn_config"] = {{"input_dim", model.config.input_dim},
                     {"hidden_sizes", model.config.hidden_sizes},
                     {"batch_norm_after_layer1", model.config.batch_norm_after_layer1},
                     {"dropout_rate", model.config.dropout_rate},
                     {"num_components", model.config.num_components},
                     {"weight_dim", model.config.weight_dim}};
  j["train_config"] = {{"epochs", model.train_echo.epochs},
                       {"batch_size", model.train_echo.batch_size},
                       {"learning_rate", model.train_echo.learning_rate},
                       {"beta1", model.train_echo.beta1},
                       {"beta2", model.train_echo.beta2},
                       {"adam_epsilon", model.train_echo.adam_epsilon},
                       {"seed", model.train_echo.seed},
                       {"scale_floor", model.train_echo.scale_floor}};
  if (std::isfinite(model.final_train_nll)) j["final_train_nll"] = model.final_train_nll;
  j["basis"] = {{"num_basis", model.basis.num_basis},
                {"length_scale_b", model.basis.length_scale_b},
                {"centers", model.basis.centers}};
  j["ridge"] = {{"lambda", model.ridge.lambda}};
  j["kernel"] = {{"length_scale_h", model.kernel.length_scale_h}};

  json maps = json::array();
  for (const PointSet& ps : model.training_maps) {
    json pts = json::array();
    for (const Point2& p : ps) pts.push_back(json::array({p.x, p.y}));
    maps.push_back(std::move(pts));
  }
  j["training_maps"] = std::move(maps);
  j["training_map_ids"] = model.training_map_ids;

  json layers = json::array();
  for (const DenseLayer& layer : model.hidden) layers.push_back(detail::dense_to_json(layer));
  j["hidden_layers"] = std::move(layers);
  j["heads"] = {{"mu", detail::dense_to_json(model.head_mu)},
                {"scale", detail::dense_to_json(model.head_scale)},
                {"alpha", detail::dense_to_json(model.head_alpha)}};
  if (model.config.batch_norm_after_layer1)
    j["batch_norm"] = {{"gamma", model.bn.gamma},
                       {"beta", model.bn.beta},
                       {"running_mean", model.bn.running_mean},
                       {"running_var", model.bn.running_var},
                       {"momentum", model.bn.momentum},
                       {"eps", model.bn.eps}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write model file: " + path);
  out << j.dump() << '\n';
  if (!out) throw io_error("write failed: " + path);
}

inline MdnModel load_model(const std::string& path) {
  using nlohmann::json;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("model file " + path + ": " + e.what());
  }

  try {
    const int version = j.at("format_version").get<int>();
    if (version != MdnModel::kFormatVersion)
      throw io_error("model file " + path + ": unsupported format_version " +
                     std::to_string(version));

    MdnModel model;
    const json& mc = j.at("mdn_config");
    model.config.input_dim = mc.at("input_dim").get<std::size_t>();
    model.config.hidden_sizes = mc.at("hidden_sizes").get<std::vector<std::size_t>>();
    model.config.batch_norm_after_layer1 = mc.at("batch_norm_after_layer1").get<bool>();
    model.config.dropout_rate = mc.at("dropout_rate").get<double>();
    model.config.num_components = mc.at("num_components").get<std::size_t>();
    model.config.weight_dim = mc.at("weight_dim").get<std::size_t>();
    model.config.family = family_from_name(j.at("family").get<std::string>());
    model.config.validate();

    const json& tc = j.at("train_config");
    model.train_echo.epochs = tc.at("epochs").get<std::size_t>();
    model.train_echo.batch_size = tc.at("batch_size").get<std::size_t>();
    model.train_echo.learning_rate = tc.at("learning_rate").get<double>();
    model.train_echo.beta1 = tc.at("beta1").get<double>();
    model.train_echo.beta2 = tc.at("beta2").get<double>();
    model.train_echo.adam_epsilon = tc.at("adam_epsilon").get<double>();
    model.train_echo.seed = tc.at("seed").get<std::uint64_t>();
    model.train_echo.scale_floor = tc.at("scale_floor").get<double>();
    if (j.contains("final_train_nll")) model.final_train_nll = j.at("final_train_nll").get<double>();

    const json& bc = j.at("basis");
    model.basis.num_basis = bc.at("num_basis").get<std::size_t>();
    model.basis.length_scale_b = bc.at("length_scale_b").get<double>();
    model.basis.centers = bc.at("centers").get<std::vector<double>>();
    if (model.basis.centers.size() != model.basis.num_basis)
      throw io_error("model file: basis centers length mismatch");
    model.ridge.lambda = j.at("ridge").at("lambda").get<double>();
    model.kernel.length_scale_h = j.at("kernel").at("length_scale_h").get<double>();

    for (const json& pts : j.at("training_maps")) {
      PointSet ps;
      for (const json& p : pts) ps.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      model.training_maps.push_back(std::move(ps));
    }
    model.training_map_ids = j.at("training_map_ids").get<std::vector<std::string>>();
    if (model.training_maps.size() != model.config.input_dim)
      throw io_error("model file: training map count does not match input_dim");

    const json& layers = j.at("hidden_layers");
    if (layers.size() != model.config.hidden_sizes.size())
      throw io_error("model file: hidden layer count mismatch");
    std::size_t in_dim = model.config.input_dim;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      model.hidden.push_back(detail::dense_from_json(
          layers[i], model.config.hidden_sizes[i], in_dim, "hidden layer " + std::to_string(i)));
      in_dim = model.config.hidden_sizes[i];
    }
    const std::size_t last = model.config.hidden_sizes.back();
    const std::size_t qd = model.config.num_components * model.config.weight_dim;
    model.head_mu = detail::dense_from_json(j.at("heads").at("mu"), qd, last, "mu head");
    model.head_scale = detail::dense_from_json(j.at("heads").at("scale"), qd, last, "scale head");
    model.head_alpha = detail::dense_from_json(j.at("heads").at("alpha"),
                                               model.config.num_components, last, "alpha head");

    if (model.config.batch_norm_after_layer1) {
      const json& bn = j.at("batch_norm");
      model.bn.gamma = bn.at("gamma").get<std::vector<double>>();
      model.bn.beta = bn.at("beta").get<std::vector<double>>();
      model.bn.running_mean = bn.at("running_mean").get<std::vector<double>>();
      model.bn.running_var = bn.at("running_var").get<std::vector<double>>();
      model.bn.momentum = bn.at("momentum").get<double>();
      model.bn.eps = bn.at("eps").get<double>();
      const std::size_t f = model.config.hidden_sizes[0];
      if (model.bn.gamma.size() != f || model.bn.beta.size() != f ||
          model.bn.running_mean.size() != f || model.bn.running_var.size() != f)
        throw io_error("model file: batch-norm tensor shape mismatch");
    }
    return model;
  } catch (const json::exception& e) {
    throw io_error("model file " + path + ": " + e.what());
  }
}

}  // namespace octnet
