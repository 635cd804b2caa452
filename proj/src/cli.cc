// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/cli.h"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mrcp/dataset.h"
#include "mrcp/errors.h"
#include "mrcp/harness.h"

namespace mrcp {
namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

struct GenDataArgs {
  std::string preset = "circle_inward";
  int agents = 5;
  int frames = 200;
  std::string out;
  std::uint64_t seed = 1;
  int height = 64;
  int width = 64;
  double hfov_deg = 60.0;
  double vfov_deg = 60.0;
  double radius = 4.0;
  double altitude = 4.0;
  double max_depth = 20.0;
  double area_radius = 10.0;
  std::string noise = "kinds=severe";
  int noisy_cameras = 0;
};

struct TrainArgs {
  std::string config;
  std::vector<std::string> settings;
};

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  std::string variant;
  std::string config;
  std::vector<int> noisy = {0, 1, 2};
  std::uint64_t eval_seed = 0;
  bool eval_seed_set = false;
};

struct BandwidthArgs {
  std::string config;
  int channels = 32;
  int height = 64;
  int width = 64;
  int agents = 5;
  int levels = 1;
  int payload_width = 4;
};

int gen_data(const GenDataArgs& a, std::ostream& out) {
  DatasetSpec spec;
  spec.frames = a.frames;
  spec.agents = a.agents;
  spec.preset = parse_formation(a.preset);
  spec.radius = a.radius;
  spec.altitude = a.altitude;
  spec.intrinsics.width = a.width;
  spec.intrinsics.height = a.height;
  spec.intrinsics.hfov = a.hfov_deg * kDegree;
  spec.intrinsics.vfov = a.vfov_deg * kDegree;
  spec.scene.max_depth = a.max_depth;
  spec.scene.area_radius = a.area_radius;
  spec.noise = NoiseSpec::parse(a.noise);
  spec.noise.n_corrupt = a.noisy_cameras;
  spec.noise.validate();
  spec.seed = a.seed;
  const DatasetManifest m = write_dataset(generate_dataset(spec), a.out);
  out << "wrote " << a.out << ": " << m.frame_count << " frames, " << m.agent_count << " agents, " << m.height
      << "x" << m.width << ", preset " << m.preset << "\n";
  return 0;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg = load_train_config(a.config);
  for (const std::string& kv : a.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  const TrainResult result = train(cfg);
  out << format_report(result.log);
  out << "checkpoint: " << result.checkpoint_path << "\n";
  return 0;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
  const std::string config_path =
      a.config.empty() ? (std::filesystem::path(a.checkpoint).parent_path() / "config.cfg").string() : a.config;
  TrainConfig cfg = load_train_config(config_path);
  if (to_string(cfg.model.variant) != a.variant) {
    throw ConfigError("checkpoint was trained as " + to_string(cfg.model.variant) + ", not " + a.variant);
  }
  const Dataset dataset = read_dataset(a.dataset);
  const ModelConfig model_cfg = resolve_model_config(cfg, dataset.manifest);
  PerceptionModel model(model_cfg, cfg.seed);
  load_checkpoint(model.params(), a.checkpoint);

  EvalOptions opts;
  opts.task = model_cfg.task;
  opts.noise = NoiseSpec::parse(cfg.noise.empty() ? dataset.manifest.noise : cfg.noise);
  opts.seed = a.eval_seed_set ? a.eval_seed : cfg.eval_seed;
  opts.noisy_settings = a.noisy;
  opts.comm_range = cfg.comm_range;
  const Split split = split_frames(static_cast<int>(dataset.manifest.frame_count), cfg.seed, cfg.eval_fraction);

  std::vector<EpisodeRow> rows;
  for (const MetricBundle& b : evaluate(dataset, split.eval, model_predictor(model), opts)) {
    rows.push_back({0, a.variant, to_string(model_cfg.task), b.noisy_cameras, 0.0, b});
  }
  out << format_report(rows);
  return 0;
}

int run_bandwidth(const BandwidthArgs& a, std::ostream& out) {
  ModelConfig m;
  m.channels = a.channels;
  m.height = a.height;
  m.width = a.width;
  m.agents = a.agents;
  m.levels = a.levels;
  if (!a.config.empty()) {
    const TrainConfig cfg = load_train_config(a.config);
    m.channels = cfg.model.channels;
    m.levels = cfg.model.levels;
    if (cfg.height) m.height = *cfg.height;
    if (cfg.width) m.width = *cfg.width;
    if (cfg.agents) m.agents = *cfg.agents;
  }
  m.validate();
  out << format_bandwidth(simulate_exchange(CommGraph::complete(m.agents), m, a.payload_width));
  return 0;
}

int run_report(const std::vector<std::string>& logs, std::ostream& out) {
  std::vector<EpisodeRow> rows;
  for (const std::string& path : logs) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open episode log " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto part = parse_episode_log(buf.str());
    rows.insert(rows.end(), part.begin(), part.end());
  }
  out << format_report(rows);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Multi-robot collaborative perception with graph neural networks", "mrcp");
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Render a synthetic multi-robot dataset");
  gen_cmd->add_option("--preset", gen.preset, "circle_inward, circle_outward or pose_varied")->capture_default_str();
  gen_cmd->add_option("--agents", gen.agents, "Robots per frame")->capture_default_str();
  gen_cmd->add_option("--frames", gen.frames, "Frame count")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output dataset path")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--height", gen.height, "Image height")->capture_default_str();
  gen_cmd->add_option("--width", gen.width, "Image width")->capture_default_str();
  gen_cmd->add_option("--hfov", gen.hfov_deg, "Horizontal field of view, degrees")->capture_default_str();
  gen_cmd->add_option("--vfov", gen.vfov_deg, "Vertical field of view, degrees")->capture_default_str();
  gen_cmd->add_option("--radius", gen.radius, "Formation radius, metres")->capture_default_str();
  gen_cmd->add_option("--altitude", gen.altitude, "Formation altitude, metres")->capture_default_str();
  gen_cmd->add_option("--max-depth", gen.max_depth, "Background depth, metres")->capture_default_str();
  gen_cmd->add_option("--area-radius", gen.area_radius, "Object placement radius, metres")->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "Noise descriptor recorded in the manifest")->capture_default_str();
  gen_cmd->add_option("--noisy-cameras", gen.noisy_cameras, "Noisy camera count recorded in the manifest")
      ->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("--config", tr.config, "Config file of key = value lines")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--set", tr.settings, "Override a config entry, key=value (repeatable)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the eval split");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--dataset", ev.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--variant", ev.variant, "Variant the checkpoint was trained as")
      ->required()
      ->check(CLI::IsMember({"baseline", "baseline-mp", "mp", "mp-pose", "mp-att"}));
  eval_cmd->add_option("--config", ev.config, "Resolved config (default: config.cfg next to the checkpoint)");
  eval_cmd->add_option("--noisy-cameras", ev.noisy, "Noisy camera counts to evaluate")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--eval-seed", ev.eval_seed, "Corruption seed override")
      ->each([&ev](const std::string&) { ev.eval_seed_set = true; });

  BandwidthArgs bw;
  auto* bw_cmd = app.add_subcommand("bandwidth", "Message versus raw-image bandwidth per frame");
  bw_cmd->add_option("--config", bw.config, "Take model dims from a config file")->check(CLI::ExistingFile);
  bw_cmd->add_option("--channels", bw.channels, "Feature channels")->capture_default_str();
  bw_cmd->add_option("--height", bw.height, "Image height")->capture_default_str();
  bw_cmd->add_option("--width", bw.width, "Image width")->capture_default_str();
  bw_cmd->add_option("--agents", bw.agents, "Robots on a complete graph")->capture_default_str();
  bw_cmd->add_option("--levels", bw.levels, "Message-passing levels")->capture_default_str();
  bw_cmd->add_option("--payload-width", bw.payload_width, "Bytes per value")->capture_default_str();

  std::vector<std::string> logs;
  auto* report_cmd = app.add_subcommand("report", "Tabulate final metrics from episode logs");
  report_cmd->add_option("logs", logs, "episode_log.tsv files")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) return gen_data(gen, out);
    if (*train_cmd) return run_train(tr, out);
    if (*eval_cmd) return run_eval(ev, out);
    if (*bw_cmd) return run_bandwidth(bw, out);
    if (*report_cmd) return run_report(logs, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mrcp
