// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "mrcp/errors.h"
#include "mrcp/ops.h"

namespace mrcp {
namespace {

constexpr std::uint64_t kTrainNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kShuffleStream = 0x73687566ULL;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long to_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (value.empty() || used != value.size()) throw ConfigError(key + ": '" + value + "' is not an integer");
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key + ": value out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(value, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (value.empty() || used != value.size()) throw ConfigError(key + ": '" + value + "' is not an unsigned integer");
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (value.empty() || used != value.size()) throw ConfigError(key + ": '" + value + "' is not a number");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": '" + value + "' is not a boolean");
}

Tensor image_tensor(const std::vector<float>& rgb, int h, int w) {
  return Tensor({3, h, w}, std::vector<double>(rgb.begin(), rgb.end()));
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

std::string fmt_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (train_noisy_cameras < 0) throw ConfigError("train_noisy_cameras must be non-negative");
  if (eval_noisy_cameras < 0) throw ConfigError("eval_noisy_cameras must be non-negative");
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) throw ConfigError("eval_fraction must be in (0, 1)");
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (!(adam.lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must be in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (!(comm_range >= 0.0)) throw ConfigError("comm_range must be non-negative");
  if (max_train_frames < 0) throw ConfigError("max_train_frames must be non-negative");
  loss.validate();
  if (!noise.empty()) NoiseSpec::parse(noise);
}

void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dataset") {
    cfg.dataset = value;
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "variant") {
    cfg.model.variant = parse_variant(value);
  } else if (key == "task") {
    cfg.model.task = parse_task(value);
  } else if (key == "levels") {
    cfg.model.levels = to_int(key, value);
  } else if (key == "channels") {
    cfg.model.channels = to_int(key, value);
  } else if (key == "heads") {
    cfg.model.heads = to_int(key, value);
  } else if (key == "share_levels") {
    cfg.model.share_levels = to_bool(key, value);
  } else if (key == "film_hidden") {
    cfg.model.film_hidden = to_int(key, value);
  } else if (key == "height") {
    cfg.height = to_int(key, value);
  } else if (key == "width") {
    cfg.width = to_int(key, value);
  } else if (key == "agents") {
    cfg.agents = to_int(key, value);
  } else if (key == "class_count") {
    cfg.class_count = to_int(key, value);
  } else if (key == "alpha_smooth") {
    cfg.loss.alpha_smooth = to_double(key, value);
  } else if (key == "beta") {
    cfg.loss.beta = to_double(key, value);
  } else if (key == "lr") {
    cfg.adam.lr = to_double(key, value);
  } else if (key == "beta1") {
    cfg.adam.beta1 = to_double(key, value);
  } else if (key == "beta2") {
    cfg.adam.beta2 = to_double(key, value);
  } else if (key == "adam_eps") {
    cfg.adam.eps = to_double(key, value);
  } else if (key == "epochs") {
    cfg.epochs = to_int(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = to_int(key, value);
  } else if (key == "seed") {
    cfg.seed = to_u64(key, value);
  } else if (key == "train_noisy_cameras") {
    cfg.train_noisy_cameras = to_int(key, value);
  } else if (key == "eval_noisy_cameras") {
    cfg.eval_noisy_cameras = to_int(key, value);
  } else if (key == "eval_seed") {
    cfg.eval_seed = to_u64(key, value);
  } else if (key == "eval_fraction") {
    cfg.eval_fraction = to_double(key, value);
  } else if (key == "eval_every") {
    cfg.eval_every = to_int(key, value);
  } else if (key == "noise") {
    cfg.noise = value;
  } else if (key == "comm_range") {
    cfg.comm_range = to_double(key, value);
  } else if (key == "max_train_frames") {
    cfg.max_train_frames = to_int(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

TrainConfig parse_train_config(const std::string& text, const std::string& origin) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str(), path);
}

std::string render_train_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "dataset = " << cfg.dataset << "\noutput_dir = " << cfg.output_dir
      << "\nvariant = " << to_string(cfg.model.variant) << "\ntask = " << to_string(cfg.model.task)
      << "\nlevels = " << cfg.model.levels << "\nchannels = " << cfg.model.channels << "\nheads = " << cfg.model.heads
      << "\nshare_levels = " << (cfg.model.share_levels ? "true" : "false")
      << "\nfilm_hidden = " << cfg.model.film_hidden;
  if (cfg.height) out << "\nheight = " << *cfg.height;
  if (cfg.width) out << "\nwidth = " << *cfg.width;
  if (cfg.agents) out << "\nagents = " << *cfg.agents;
  if (cfg.class_count) out << "\nclass_count = " << *cfg.class_count;
  out << "\nalpha_smooth = " << cfg.loss.alpha_smooth << "\nbeta = " << cfg.loss.beta << "\nlr = " << cfg.adam.lr
      << "\nbeta1 = " << cfg.adam.beta1 << "\nbeta2 = " << cfg.adam.beta2 << "\nadam_eps = " << cfg.adam.eps
      << "\nepochs = " << cfg.epochs << "\nbatch_size = " << cfg.batch_size << "\nseed = " << cfg.seed
      << "\ntrain_noisy_cameras = " << cfg.train_noisy_cameras << "\neval_noisy_cameras = " << cfg.eval_noisy_cameras
      << "\neval_seed = " << cfg.eval_seed << "\neval_fraction = " << cfg.eval_fraction
      << "\neval_every = " << cfg.eval_every << "\ncomm_range = " << cfg.comm_range
      << "\nmax_train_frames = " << cfg.max_train_frames;
  if (!cfg.noise.empty()) out << "\nnoise = " << cfg.noise;
  out << "\n";
  return out.str();
}

ModelConfig resolve_model_config(const TrainConfig& cfg, const DatasetManifest& manifest) {
  ModelConfig m = cfg.model;
  auto pick = [](const std::optional<int>& set, std::uint32_t actual, const char* name) {
    if (set && *set != static_cast<int>(actual)) {
      throw ConfigError(std::string("config ") + name + " = " + std::to_string(*set) + " but the dataset has " +
                        std::to_string(actual));
    }
    return static_cast<int>(actual);
  };
  m.height = pick(cfg.height, manifest.height, "height");
  m.width = pick(cfg.width, manifest.width, "width");
  m.agents = pick(cfg.agents, manifest.agent_count, "agents");
  m.class_count = m.task == Task::kDepth ? 1 : pick(cfg.class_count, manifest.class_count, "class_count");
  if (cfg.train_noisy_cameras > m.agents || cfg.eval_noisy_cameras > m.agents) {
    throw ConfigError("noisy camera count exceeds the dataset's " + std::to_string(m.agents) + " agents");
  }
  m.validate();
  return m;
}

Split split_frames(int frame_count, std::uint64_t seed, double eval_fraction) {
  if (frame_count < 2) throw ConfigError("need at least 2 frames to split into train and eval");
  std::vector<std::pair<std::uint64_t, int>> keyed;
  for (int i = 0; i < frame_count; ++i) {
    keyed.emplace_back(Rng::mix(seed ^ Rng::mix(static_cast<std::uint64_t>(i) + 0x51ULL)), i);
  }
  std::sort(keyed.begin(), keyed.end());
  const int n_eval = std::clamp(static_cast<int>(std::lround(eval_fraction * frame_count)), 1, frame_count - 1);
  Split s;
  for (int k = 0; k < frame_count; ++k) (k < n_eval ? s.eval : s.train).push_back(keyed[static_cast<std::size_t>(k)].second);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.eval.begin(), s.eval.end());
  return s;
}

FrameInputs frame_inputs(const FrameSample& frame, int height, int width, double comm_range) {
  FrameInputs in;
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  for (const AgentView& a : frame.agents) {
    if (a.depth.size() != plane || a.rgb.size() != 3 * plane) {
      throw DimensionError("frame_inputs: agent view does not match " + std::to_string(height) + "x" +
                           std::to_string(width));
    }
    in.clean_images.push_back(image_tensor(a.rgb, height, width));
    in.depth.emplace_back(Shape{height, width}, std::vector<double>(a.depth.begin(), a.depth.end()));
    in.seg.emplace_back(a.seg.begin(), a.seg.end());
    in.poses.push_back(usable_pose(a.pose));
  }
  in.images = in.clean_images;
  in.graph = comm_range > 0.0 ? build_graph(in.poses, comm_range)
                              : CommGraph::complete(static_cast<int>(frame.agents.size()));
  return in;
}

Predictor model_predictor(const PerceptionModel& model) {
  return [&model](const FrameInputs& in) { return model.forward(in.graph, in.images, in.poses); };
}

std::vector<MetricBundle> evaluate(const Dataset& dataset, std::span<const int> frames,
                                   const Predictor& predictor, const EvalOptions& options) {
  if (frames.empty()) throw EvaluationError("evaluate: no frames to evaluate");
  const auto& m = dataset.manifest;
  const int h = static_cast<int>(m.height);
  const int w = static_cast<int>(m.width);
  const Rng root(options.seed);
  std::vector<MetricBundle> out;
  for (int noisy : options.noisy_settings) {
    if (noisy < 0 || noisy > static_cast<int>(m.agent_count)) {
      throw EvaluationError("evaluate: noisy camera count " + std::to_string(noisy) + " outside [0, " +
                            std::to_string(m.agent_count) + "]");
    }
    NoiseSpec spec = options.noise;
    spec.n_corrupt = noisy;
    DepthAccumulator depth(m.max_depth);
    ConfusionCounts counts(options.task == Task::kSegmentation ? static_cast<int>(m.class_count) : 1);
    for (int f : frames) {
      if (f < 0 || f >= static_cast<int>(dataset.frames.size())) throw EvaluationError("evaluate: frame index out of range");
      FrameInputs in = frame_inputs(dataset.frames[static_cast<std::size_t>(f)], h, w, options.comm_range);
      Rng rng = root.substream(static_cast<std::uint64_t>(f)).substream(static_cast<std::uint64_t>(noisy));
      corrupt_cameras(in.images, spec, rng);
      const std::vector<Tensor> pred = predictor(in);
      if (pred.size() != in.images.size()) {
        throw EvaluationError("evaluate: predictor returned " + std::to_string(pred.size()) + " outputs for " +
                              std::to_string(in.images.size()) + " robots");
      }
      for (std::size_t a = 0; a < pred.size(); ++a) {
        if (options.task == Task::kDepth) {
          depth.add(pred[a].data(), in.depth[a].data());
        } else {
          counts.add(argmax_classes(pred[a].data(), counts.class_count()), in.seg[a]);
        }
      }
    }
    MetricBundle b;
    b.noisy_cameras = noisy;
    if (options.task == Task::kDepth) {
      b.depth = depth.result();
    } else {
      b.miou = counts.miou();
    }
    out.push_back(b);
  }
  return out;
}

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  const Dataset dataset = read_dataset(cfg.dataset);
  const DatasetManifest& manifest = dataset.manifest;
  const ModelConfig model_cfg = resolve_model_config(cfg, manifest);
  const NoiseSpec noise = NoiseSpec::parse(cfg.noise.empty() ? manifest.noise : cfg.noise);
  const Split split = split_frames(static_cast<int>(manifest.frame_count), cfg.seed, cfg.eval_fraction);
  std::vector<int> train_frames = split.train;
  if (cfg.max_train_frames > 0 && static_cast<int>(train_frames.size()) > cfg.max_train_frames) {
    train_frames.resize(static_cast<std::size_t>(cfg.max_train_frames));
  }

  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);

  PerceptionModel model(model_cfg, cfg.seed);
  TrainConfig resolved = cfg;
  resolved.model = model_cfg;
  resolved.height = model_cfg.height;
  resolved.width = model_cfg.width;
  resolved.agents = model_cfg.agents;
  if (model_cfg.task == Task::kSegmentation) resolved.class_count = model_cfg.class_count;
  resolved.noise = noise.describe();

  EvalOptions eval_opts;
  eval_opts.task = model_cfg.task;
  eval_opts.noise = noise;
  eval_opts.seed = cfg.eval_seed;
  eval_opts.comm_range = cfg.comm_range;
  eval_opts.noisy_settings.clear();
  for (int k = 0; k <= cfg.eval_noisy_cameras; ++k) eval_opts.noisy_settings.push_back(k);

  Rng shuffle_rng = Rng(cfg.seed).substream(kShuffleStream);
  Rng noise_rng = Rng(cfg.seed).substream(kTrainNoiseStream);
  const int h = model_cfg.height;
  const int w = model_cfg.width;
  const double batch_scale = 1.0 / cfg.batch_size;

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> order = train_frames;
    shuffle_rng.shuffle(std::span<int>(order));
    double loss_sum = 0.0;
    int pending = 0;
    for (std::size_t s = 0; s < order.size(); ++s) {
      FrameInputs in = frame_inputs(dataset.frames[static_cast<std::size_t>(order[s])], h, w, cfg.comm_range);
      NoiseSpec step_noise = noise;
      step_noise.n_corrupt = noise_rng.uniform_int(0, cfg.train_noisy_cameras);
      corrupt_cameras(in.images, step_noise, noise_rng);

      Tape tape;
      Tensor loss;
      {
        TapeScope scope(tape);
        const std::vector<Tensor> pred = model.forward(in.graph, in.images, in.poses);
        std::vector<Tensor> per_robot;
        for (std::size_t a = 0; a < pred.size(); ++a) {
          per_robot.push_back(model_cfg.task == Task::kDepth
                                  ? depth_loss(in.images[a], pred[a], in.depth[a], cfg.loss)
                                  : seg_loss(pred[a], in.seg[a]));
        }
        loss = total_loss(per_robot);
        if (cfg.batch_size > 1) loss = scale(loss, batch_scale);
      }
      const double value = loss.item() * cfg.batch_size;
      if (!std::isfinite(value)) {
        throw EvaluationError("training diverged at epoch " + std::to_string(epoch) + ": loss is not finite");
      }
      result.step_losses.push_back(value);
      loss_sum += value;
      if (pending == 0) model.params().zero_grad();
      backward(loss, tape);
      if (++pending == cfg.batch_size || s + 1 == order.size()) {
        adam_step(model.params(), cfg.adam);
        pending = 0;
      }
    }
    const double train_loss = loss_sum / static_cast<double>(order.size());
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      for (const MetricBundle& b : evaluate(dataset, split.eval, model_predictor(model), eval_opts)) {
        result.log.push_back({epoch, to_string(model_cfg.variant), to_string(model_cfg.task), b.noisy_cameras,
                              train_loss, b});
      }
    }
    result.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  result.checkpoint_path = (dir / "checkpoint.mrcp").string();
  save_checkpoint(model.params(), result.checkpoint_path);
  write_text(dir / "config.cfg", render_train_config(resolved));
  write_text(dir / "episode_log.tsv", format_episode_log(result.log));
  std::ostringstream timing;
  timing << "epoch\twall_seconds\n";
  for (std::size_t e = 0; e < result.epoch_seconds.size(); ++e) {
    timing << (e + 1) << "\t" << fmt(result.epoch_seconds[e]) << "\n";
  }
  write_text(dir / "timing.tsv", timing.str());
  return result;
}

std::string format_episode_log(const std::vector<EpisodeRow>& rows) {
  std::ostringstream out;
  out << "epoch\tvariant\ttask\tnoisy_cameras\ttrain_loss\tabs_rel\tsq_rel\trmse\tmiou\n";
  for (const EpisodeRow& r : rows) {
    out << r.epoch << "\t" << r.variant << "\t" << r.task << "\t" << r.noisy_cameras << "\t" << fmt(r.train_loss);
    if (r.metrics.depth) {
      out << "\t" << fmt(r.metrics.depth->abs_rel) << "\t" << fmt(r.metrics.depth->sq_rel) << "\t"
          << fmt(r.metrics.depth->rmse);
    } else {
      out << "\t-\t-\t-";
    }
    out << "\t" << (r.metrics.miou ? fmt(*r.metrics.miou) : std::string("-")) << "\n";
  }
  return out.str();
}

std::vector<EpisodeRow> parse_episode_log(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch\tvariant", 0) != 0) {
    throw FormatError("episode log: missing header row");
  }
  std::vector<EpisodeRow> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, '\t')) f.push_back(cell);
    if (f.size() != 9) throw FormatError("episode log line " + std::to_string(number) + ": expected 9 fields");
    try {
      EpisodeRow r;
      r.epoch = std::stoi(f[0]);
      r.variant = f[1];
      r.task = f[2];
      r.noisy_cameras = std::stoi(f[3]);
      r.metrics.noisy_cameras = r.noisy_cameras;
      r.train_loss = std::stod(f[4]);
      if (f[5] != "-") r.metrics.depth = DepthMetrics{std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
      if (f[8] != "-") r.metrics.miou = std::stod(f[8]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw FormatError("episode log line " + std::to_string(number) + ": malformed number");
    }
  }
  return rows;
}

BandwidthReport simulate_exchange(const CommGraph& graph, const ModelConfig& cfg, int payload_width) {
  if (payload_width < 1) throw ConfigError("payload width must be at least 1 byte");
  BandwidthReport r;
  r.levels = cfg.levels;
  r.directed_links = graph.directed_link_count();
  r.bytes_per_link_per_level = static_cast<std::uint64_t>(cfg.channels) * cfg.feature_height() *
                               cfg.feature_width() * static_cast<std::uint64_t>(payload_width);
  r.message_bytes_per_frame = r.bytes_per_link_per_level * r.directed_links * static_cast<std::uint64_t>(cfg.levels);
  r.raw_bytes_per_image = 3ULL * cfg.height * cfg.width * static_cast<std::uint64_t>(payload_width);
  r.raw_bytes_per_frame = r.raw_bytes_per_image * r.directed_links;
  r.ratio = static_cast<double>(r.bytes_per_link_per_level) / static_cast<double>(r.raw_bytes_per_image);
  return r;
}

std::string format_bandwidth(const BandwidthReport& r) {
  std::ostringstream out;
  out << "message bytes per link per level : " << r.bytes_per_link_per_level << "\n"
      << "directed links                   : " << r.directed_links << "\n"
      << "levels                           : " << r.levels << "\n"
      << "message bytes per frame          : " << r.message_bytes_per_frame << "\n"
      << "raw image bytes                  : " << r.raw_bytes_per_image << "\n"
      << "raw bytes per frame              : " << r.raw_bytes_per_frame << "\n"
      << "message / raw image              : " << fmt_fixed(r.ratio) << "\n"
      << "reference point                  : " << kReferenceMessageMBpf << " MBpf message vs "
      << kReferenceRawMBpf << " MBpf raw, ratio " << fmt_fixed(kReferenceMessageMBpf / kReferenceRawMBpf) << "\n";
  return out.str();
}

std::string format_report(const std::vector<EpisodeRow>& rows) {
  if (rows.empty()) throw FormatError("report: no episode rows");
  std::map<std::string, int> last_epoch;
  std::set<int> settings;
  for (const EpisodeRow& r : rows) {
    last_epoch[r.variant] = std::max(last_epoch[r.variant], r.epoch);
    settings.insert(r.noisy_cameras);
  }
  std::vector<std::string> variants;
  for (Variant v : {Variant::kBaseline, Variant::kBaselineMp, Variant::kMp, Variant::kMpPose, Variant::kMpAtt}) {
    if (last_epoch.count(to_string(v))) variants.push_back(to_string(v));
  }
  for (const auto& [name, epoch] : last_epoch) {
    if (std::find(variants.begin(), variants.end(), name) == variants.end()) variants.push_back(name);
  }

  const char* metric_names[] = {"Abs Rel", "Sq Rel", "RMSE", "mIoU"};
  const int cell = 9;
  std::size_t name_width = 8;
  for (const auto& v : variants) name_width = std::max(name_width, v.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width)) << "" << " ";
  for (int s : settings) {
    std::string label = std::to_string(s) + " noisy camera" + (s == 1 ? "" : "s");
    out << "| " << std::setw(4 * cell) << label;
  }
  out << "\n" << std::setw(static_cast<int>(name_width)) << "variant" << " ";
  for (std::size_t i = 0; i < settings.size(); ++i) {
    out << "| ";
    for (const char* m : metric_names) out << std::setw(cell) << m;
  }
  out << "\n";
  for (const auto& v : variants) {
    out << std::setw(static_cast<int>(name_width)) << v << " ";
    for (int s : settings) {
      const EpisodeRow* found = nullptr;
      for (const EpisodeRow& r : rows) {
        if (r.variant == v && r.epoch == last_epoch[v] && r.noisy_cameras == s) found = &r;
      }
      out << "| ";
      std::string cells[4] = {"-", "-", "-", "-"};
      if (found && found->metrics.depth) {
        cells[0] = fmt_fixed(found->metrics.depth->abs_rel);
        cells[1] = fmt_fixed(found->metrics.depth->sq_rel);
        cells[2] = fmt_fixed(found->metrics.depth->rmse);
      }
      if (found && found->metrics.miou) cells[3] = fmt_fixed(*found->metrics.miou);
      for (const auto& c : cells) out << std::setw(cell) << c;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mrcp
