// octnet: map-conditioned trajectory generation pipeline.
//
// Subcommands: synth, train, generate, evaluate, plot.
// Exit codes: 0 success, 1 usage error, 2 I/O error,
//             3 numerical or sampling failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "octnet/errors.hpp"
#include "octnet/evaluate.hpp"
#include "octnet/generator.hpp"
#include "octnet/mdn.hpp"
#include "octnet/model_io.hpp"
#include "octnet/occupancy.hpp"
#include "octnet/pipeline.hpp"
#include "octnet/svg.hpp"
#include "octnet/synth.hpp"
#include "octnet/trajectory_io.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct SynthArgs {
  std::string out_dir;
  octnet::SynthParams params;
  double split_fraction = 0.0;
  std::uint64_t split_seed = 0;
  bool split_seed_set = false;
};

void run_synth(const SynthArgs& args) {
  octnet::Dataset dataset = octnet::make_dataset(args.params);
  octnet::validate_dataset(dataset);
  octnet::save_dataset(dataset, args.out_dir);
  std::cout << "maps = " << dataset.entries.size() << "\n";
  std::cout << "manifest = " << (fs::path(args.out_dir) / "manifest.json").string() << "\n";

  if (args.split_fraction > 0.0 && dataset.entries.size() >= 2) {
    const std::uint64_t split_seed =
        args.split_seed_set ? args.split_seed : args.params.seed;
    auto [train, test] = octnet::split(dataset, args.split_fraction, split_seed);
    const json split_echo{{"fraction", args.split_fraction}, {"seed", split_seed}};
    json train_extra{{"split", split_echo}};
    train_extra["split"]["role"] = "train";
    json test_extra{{"split", split_echo}};
    test_extra["split"]["role"] = "test";
    octnet::save_manifest_view(train, args.out_dir, "manifest_train.json", train_extra);
    octnet::save_manifest_view(test, args.out_dir, "manifest_test.json", test_extra);
    std::cout << "train_maps = " << train.entries.size() << "\n";
    std::cout << "test_maps = " << test.entries.size() << "\n";
  }
}

struct TrainArgs {
  std::string manifest;
  std::string out_path;
  std::string dist = "normal";
  octnet::TrainConfig train_cfg;
  std::size_t num_basis = 10;
  double length_scale_b = 0.15;
  double lambda = 1e-2;
  double length_scale_h = 50.0;
  std::size_t components = 6;
  double dropout = 0.25;
  std::vector<std::size_t> hidden = {500, 500, 500, 500, 500};
};

void run_train(const TrainArgs& args) {
  const octnet::Dataset train_set = octnet::load_dataset(args.manifest);

  octnet::MdnConfig mdn_cfg;
  mdn_cfg.family = octnet::family_from_name(args.dist);
  mdn_cfg.hidden_sizes = args.hidden;
  mdn_cfg.dropout_rate = args.dropout;
  mdn_cfg.num_components = args.components;

  const octnet::BasisConfig basis = octnet::BasisConfig::make(args.num_basis, args.length_scale_b);
  const octnet::RidgeConfig ridge{args.lambda};
  const octnet::KernelConfig kernel{args.length_scale_h};

  octnet::MdnModel model =
      octnet::train_pipeline(train_set, mdn_cfg, args.train_cfg, basis, ridge, kernel);
  octnet::save_model(model, args.out_path);
  std::cout << "family = " << octnet::family_name(model.config.family) << "\n";
  std::cout << "final_mean_nll = " << octnet::format_double(model.final_train_nll) << "\n";
  std::cout << "model = " << args.out_path << "\n";
}

struct GenerateArgs {
  std::string model_path;
  std::string map_path;
  std::string out_path;
  std::size_t num = 50;
  std::size_t points = 100;
  octnet::GenerationConfig gen;
  std::uint64_t seed = 1;
};

void run_generate(const GenerateArgs& args) {
  const octnet::MdnModel model = octnet::load_model(args.model_path);
  const octnet::OccupancyGrid grid = octnet::load_grid(args.map_path);
  octnet::Rng rng(args.seed);
  const octnet::BatchResult batch =
      octnet::generate_batch(model, grid, args.gen, args.num, rng);

  std::vector<octnet::DiscreteTrajectory> trajs;
  for (const octnet::TrajectoryWeights& w : batch.weights)
    trajs.push_back(octnet::discretise(w, model.basis, args.points));
  if (!trajs.empty()) octnet::save_trajectories(trajs, args.out_path);

  std::cout << "accepted = " << batch.stats.accepted << "\n";
  std::cout << "attempts = " << batch.stats.attempts << "\n";
  std::cout << "acceptance_rate = " << octnet::format_double(batch.stats.acceptance_rate())
            << "\n";
  if (!batch.stats.complete())
    throw octnet::generation_error("generate: exhausted max_attempts after accepting " +
                                       std::to_string(batch.stats.accepted) + " of " +
                                       std::to_string(batch.stats.requested),
                                   batch.stats.attempts);
}

struct EvaluateArgs {
  std::string manifest;
  std::vector<std::string> model_paths;
  std::string out_dir;
  octnet::EvalConfig cfg;
  bool omit_timings = false;
};

void run_evaluate(const EvaluateArgs& args) {
  const octnet::Dataset test_set = octnet::load_dataset(args.manifest);

  std::vector<octnet::MdnModel> models;
  std::vector<std::string> labels;
  for (const std::string& path : args.model_paths) {
    models.push_back(octnet::load_model(path));
    std::string base = octnet::family_name(models.back().config.family);
    std::string label = base;
    int suffix = 2;
    while (std::find(labels.begin(), labels.end(), label) != labels.end())
      label = base + "_" + std::to_string(suffix++);
    labels.push_back(label);
  }

  std::error_code ec;
  fs::create_directories(fs::path(args.out_dir) / "generated", ec);
  if (ec) throw octnet::io_error("cannot create output directory " + args.out_dir);

  octnet::EvalOutcome outcome;
  json timings;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    outcome.variants.push_back(
        octnet::evaluate_model(models[i], labels[i], i, test_set, args.cfg));
    timings["evaluate_" + labels[i]] = seconds_since(start);
  }
  {
    const auto start = std::chrono::steady_clock::now();
    outcome.baseline = octnet::evaluate_baseline(test_set, args.cfg);
    timings["evaluate_random_baseline"] = seconds_since(start);
  }

  auto dump_variant = [&](const octnet::VariantEval& variant) {
    const fs::path dir = fs::path(args.out_dir) / "generated" / variant.label;
    fs::create_directories(dir, ec);
    if (ec) throw octnet::io_error("cannot create " + dir.string());
    for (const octnet::MapEval& m : variant.maps)
      if (!m.trajectories.empty())
        octnet::save_trajectories(m.trajectories, (dir / (m.map_id + ".csv")).string());
  };
  for (const octnet::VariantEval& variant : outcome.variants) dump_variant(variant);
  dump_variant(outcome.baseline);

  const json report =
      octnet::report_to_json(outcome, args.cfg, args.omit_timings ? json{} : timings);
  {
    std::ofstream out(fs::path(args.out_dir) / "report.json", std::ios::binary);
    if (!out) throw octnet::io_error("cannot write report in " + args.out_dir);
    out << report.dump(2) << '\n';
    if (!out) throw octnet::io_error("report write failed in " + args.out_dir);
  }

  bool incomplete = false;
  for (const octnet::VariantEval& variant : outcome.variants) {
    const octnet::Aggregate agg = octnet::aggregate_variant(variant);
    std::cout << variant.label << ".acceptance_rate = "
              << octnet::format_double(agg.acceptance_rate()) << "\n";
    if (agg.row_count > 0)
      std::cout << variant.label << ".mtd_dtw_mean = "
                << octnet::format_double(agg.dtw_mean) << "\n";
    for (const octnet::MapEval& m : variant.maps)
      if (!m.stats.complete()) incomplete = true;
  }
  {
    const octnet::Aggregate agg = octnet::aggregate_variant(outcome.baseline);
    if (agg.row_count > 0)
      std::cout << "random_baseline.mtd_dtw_mean = "
                << octnet::format_double(agg.dtw_mean) << "\n";
  }
  std::cout << "report = " << (fs::path(args.out_dir) / "report.json").string() << "\n";
  if (incomplete)
    throw octnet::generation_error("evaluate: at least one map exhausted max_attempts", 0);
}

struct PlotArgs {
  std::string map_path;
  std::vector<std::string> truth_csvs;
  std::vector<std::string> gen_csvs;
  std::string out_path;
};

void run_plot(const PlotArgs& args) {
  const octnet::OccupancyGrid grid = octnet::load_grid(args.map_path);
  std::vector<octnet::SvgTrajectoryGroup> groups;
  if (!args.truth_csvs.empty()) {
    octnet::SvgTrajectoryGroup group;
    group.stroke = "#1f77b4";
    for (const std::string& path : args.truth_csvs)
      for (auto& traj : octnet::load_trajectories(path)) group.trajectories.push_back(traj);
    groups.push_back(std::move(group));
  }
  if (!args.gen_csvs.empty()) {
    octnet::SvgTrajectoryGroup group;
    group.stroke = "#d62728";
    for (const std::string& path : args.gen_csvs)
      for (auto& traj : octnet::load_trajectories(path)) group.trajectories.push_back(traj);
    groups.push_back(std::move(group));
  }
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw octnet::io_error("cannot write SVG: " + args.out_path);
  out << octnet::render_svg(grid, groups);
  if (!out) throw octnet::io_error("SVG write failed: " + args.out_path);
  std::cout << "svg = " << args.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"octnet: generate trajectories in unseen occupancy maps"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "synthesize an indoor map/trajectory dataset");
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth->add_option("--num-maps", synth_args.params.num_maps, "number of maps")
      ->capture_default_str();
  synth->add_option("--rows", synth_args.params.rows, "grid rows")->capture_default_str();
  synth->add_option("--cols", synth_args.params.cols, "grid columns")->capture_default_str();
  synth->add_option("--rooms-min", synth_args.params.rooms_min, "minimum rooms per map")
      ->capture_default_str();
  synth->add_option("--rooms-max", synth_args.params.rooms_max, "maximum rooms per map")
      ->capture_default_str();
  synth->add_option("--corridor-width", synth_args.params.corridor_width,
                    "corridor width in cells")
      ->capture_default_str();
  synth->add_option("--traj-per-map", synth_args.params.trajectories_per_map,
                    "trajectories per map")
      ->capture_default_str();
  synth->add_option("--traj-points", synth_args.params.waypoints,
                    "waypoints per trajectory (T)")
      ->capture_default_str();
  synth->add_option("--seed", synth_args.params.seed, "synthesis seed")->capture_default_str();
  synth->add_option("--split", synth_args.split_fraction,
                    "also write train/test split manifests with this train fraction")
      ->capture_default_str();
  auto* split_seed_opt =
      synth->add_option("--split-seed", synth_args.split_seed, "split seed (default: --seed)");
  synth->callback([&] {
    synth_args.split_seed_set = split_seed_opt->count() > 0;
    run_synth(synth_args);
  });

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train a mixture density network");
  train->add_option("--manifest", train_args.manifest, "training dataset manifest")->required();
  train->add_option("--out", train_args.out_path, "output model file")->required();
  train->add_option("--dist", train_args.dist, "mixture family: normal|laplace")
      ->check(CLI::IsMember({"normal", "laplace"}))
      ->capture_default_str();
  train->add_option("--epochs", train_args.train_cfg.epochs, "training epochs")
      ->capture_default_str();
  train->add_option("--batch-size", train_args.train_cfg.batch_size, "mini-batch size")
      ->capture_default_str();
  train->add_option("--lr", train_args.train_cfg.learning_rate, "Adam step size")
      ->capture_default_str();
  train->add_option("--scale-floor", train_args.train_cfg.scale_floor,
                    "floor added to exponential scale activations")
      ->capture_default_str();
  train->add_option("--seed", train_args.train_cfg.seed, "training seed")->capture_default_str();
  train->add_option("--lh", train_args.length_scale_h, "map kernel length scale")
      ->capture_default_str();
  train->add_option("--lb", train_args.length_scale_b, "basis length scale (normalised tau)")
      ->capture_default_str();
  train->add_option("--basis", train_args.num_basis, "number of basis functions (M)")
      ->capture_default_str();
  train->add_option("--lambda", train_args.lambda, "ridge regularisation")
      ->capture_default_str();
  train->add_option("--components", train_args.components, "mixture components (Q)")
      ->capture_default_str();
  train->add_option("--dropout", train_args.dropout, "dropout rate")->capture_default_str();
  train->add_option("--hidden", train_args.hidden, "hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  train->callback([&] { run_train(train_args); });

  GenerateArgs gen_args;
  CLI::App* generate = app.add_subcommand("generate", "sample valid trajectories for a map");
  generate->add_option("--model", gen_args.model_path, "trained model file")->required();
  generate->add_option("--map", gen_args.map_path, ".occ map file")->required();
  generate->add_option("--out", gen_args.out_path, "output trajectory CSV")->required();
  generate->add_option("--num", gen_args.num, "trajectories to generate")
      ->capture_default_str();
  generate->add_option("--points", gen_args.points, "waypoints per output trajectory")
      ->capture_default_str();
  generate->add_option("--checks", gen_args.gen.num_validity_checks,
                       "evenly spaced validity checks")
      ->capture_default_str();
  generate->add_option("--max-attempts", gen_args.gen.max_attempts,
                       "sampling budget per accepted trajectory")
      ->capture_default_str();
  generate->add_option("--seed", gen_args.seed, "sampling seed")->capture_default_str();
  generate->callback([&] { run_generate(gen_args); });

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score generated trajectories with MTD");
  evaluate->add_option("--manifest", eval_args.manifest, "test dataset manifest")->required();
  evaluate->add_option("--model", eval_args.model_paths, "model file (repeatable)")
      ->required()
      ->take_all();
  evaluate->add_option("--out-dir", eval_args.out_dir, "output directory")->required();
  evaluate->add_option("--num", eval_args.cfg.num_per_map, "trajectories per test map")
      ->capture_default_str();
  evaluate->add_option("--points", eval_args.cfg.discretise_points,
                       "waypoints per generated trajectory")
      ->capture_default_str();
  evaluate->add_option("--checks", eval_args.cfg.gen.num_validity_checks,
                       "evenly spaced validity checks")
      ->capture_default_str();
  evaluate->add_option("--max-attempts", eval_args.cfg.gen.max_attempts,
                       "sampling budget per accepted trajectory")
      ->capture_default_str();
  evaluate->add_option("--seed", eval_args.cfg.seed, "evaluation seed")->capture_default_str();
  evaluate->add_flag("--omit-timings", eval_args.omit_timings,
                     "leave wall-clock durations out of the report (byte-reproducible output)");
  evaluate->callback([&] { run_evaluate(eval_args); });

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot", "render a map and trajectories as SVG");
  plot->add_option("--map", plot_args.map_path, ".occ map file")->required();
  plot->add_option("--truth", plot_args.truth_csvs, "ground-truth trajectory CSV (repeatable)")
      ->take_all();
  plot->add_option("--gen", plot_args.gen_csvs, "generated trajectory CSV (repeatable)")
      ->take_all();
  plot->add_option("--out", plot_args.out_path, "output SVG file")->required();
  plot->callback([&] { run_plot(plot_args); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const octnet::generation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const octnet::numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const octnet::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const octnet::synth_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
