// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/model.h"

#include <algorithm>
#include <array>
#include <cstring>

#include "binary_io.h"
#include "mrcp/errors.h"
#include "mrcp/ops.h"

namespace mrcp {
namespace {

constexpr std::array<int, 4> kEncoderStrides = {2, 2, 2, 1};

struct Layer {
  const char* name;
  bool transposed;
  int stride;
  int padding;
  int kernel;
};

// Three x2 upsampling steps interleaved with two refinement convolutions.
constexpr std::array<Layer, 5> kDecoder = {{
    {"decoder.up0", true, 2, 1, 4},
    {"decoder.refine0", false, 1, 1, 3},
    {"decoder.up1", true, 2, 1, 4},
    {"decoder.refine1", false, 1, 1, 3},
    {"decoder.up2", true, 2, 1, 4},
}};

void add_conv(ParamStore& params, const std::string& name, int cin, int cout, int k, Rng& rng) {
  params.add_uniform(name + ".weight", {cout, cin, k, k}, cin * k * k, rng);
  params.add_uniform(name + ".bias", {cout}, cin * k * k, rng);
}

// Each output of a stride-s transposed convolution sums cin * ceil(k/s)^2 inputs.
void add_conv_transpose(ParamStore& params, const std::string& name, int cin, int cout, int k, int stride,
                        Rng& rng) {
  const int taps = (k + stride - 1) / stride;
  const int fan_in = cin * taps * taps;
  params.add_uniform(name + ".weight", {cin, cout, k, k}, fan_in, rng);
  params.add_uniform(name + ".bias", {cout}, fan_in, rng);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kBaselineMp: return "baseline-mp";
    case Variant::kMp: return "mp";
    case Variant::kMpPose: return "mp-pose";
    case Variant::kMpAtt: return "mp-att";
  }
  return "?";
}

std::string to_string(Task t) { return t == Task::kDepth ? "depth" : "segmentation"; }

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kBaseline, Variant::kBaselineMp, Variant::kMp, Variant::kMpPose, Variant::kMpAtt}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "' (expected baseline, baseline-mp, mp, mp-pose, mp-att)");
}

Task parse_task(const std::string& name) {
  if (name == "depth") return Task::kDepth;
  if (name == "segmentation" || name == "seg") return Task::kSegmentation;
  throw ConfigError("unknown task '" + name + "' (expected depth or segmentation)");
}

bool uses_graph(Variant v) { return v == Variant::kMp || v == Variant::kMpPose || v == Variant::kMpAtt; }

void ModelConfig::validate() const {
  if (levels < 1 || levels > 2) throw ConfigError("levels must be 1 or 2");
  if (heads < 1) throw ConfigError("heads must be at least 1");
  if (channels < 2 || channels % 2 != 0) throw ConfigError("channels must be a positive even number");
  if (height < 8 || width < 8 || height % 8 != 0 || width % 8 != 0) {
    throw ConfigError("image dimensions must be positive multiples of 8");
  }
  if (task == Task::kSegmentation && class_count < 2) throw ConfigError("segmentation needs at least 2 classes");
  if (variant == Variant::kBaselineMp && agents < 1) throw ConfigError("baseline-mp needs a positive agent count");
  if (film_hidden < 1) throw ConfigError("film_hidden must be positive");
}

PerceptionModel::PerceptionModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int c = config_.channels;
  const int out = config_.output_channels();
  const bool stacked = config_.variant == Variant::kBaselineMp;
  const int in_channels = stacked ? 3 * config_.agents : 3;
  const int out_channels = stacked ? out * config_.agents : out;

  const std::array<int, 5> widths = {in_channels, 16, 32, c, c};
  for (std::size_t i = 0; i < kEncoderStrides.size(); ++i) {
    add_conv(params_, "encoder.conv" + std::to_string(i), widths[i], widths[i + 1], 3, rng);
  }
  const std::array<int, 6> dec = {2 * c, c, c, c / 2, c / 2, out_channels};
  for (std::size_t i = 0; i < kDecoder.size(); ++i) {
    const auto& layer = kDecoder[i];
    if (layer.transposed) {
      add_conv_transpose(params_, layer.name, dec[i], dec[i + 1], layer.kernel, layer.stride, rng);
    } else {
      add_conv(params_, layer.name, dec[i], dec[i + 1], layer.kernel, rng);
    }
  }

  const int level_sets = config_.share_levels ? 1 : config_.levels;
  for (int l = 0; l < level_sets; ++l) {
    if (config_.variant == Variant::kMpPose) {
      FilmWeights::init(params_, film_prefix(l), c, config_.film_hidden, rng);
    } else if (config_.variant == Variant::kMpAtt) {
      for (int d = 0; d < config_.heads; ++d) {
        AttentionHead::init(params_, head_prefix(l, d), c, config_.feature_height(),
                            config_.feature_width(), rng);
      }
    }
  }
}

std::string PerceptionModel::film_prefix(int level) const {
  return config_.share_levels ? std::string("film") : "film.l" + std::to_string(level);
}

std::string PerceptionModel::head_prefix(int level, int head) const {
  const std::string base = config_.share_levels ? std::string("attention") : "attention.l" + std::to_string(level);
  return base + ".head" + std::to_string(head);
}

Tensor PerceptionModel::run_encoder(const Tensor& image) const {
  Tensor x = image;
  for (std::size_t i = 0; i < kEncoderStrides.size(); ++i) {
    const std::string name = "encoder.conv" + std::to_string(i);
    x = conv2d(x, params_.get(name + ".weight"), params_.get(name + ".bias"), kEncoderStrides[i], 1);
    if (i + 1 < kEncoderStrides.size()) x = activation(x, Activation::relu());
  }
  return x;
}

Tensor PerceptionModel::encode(const Tensor& image) const {
  const int expected = config_.variant == Variant::kBaselineMp ? 3 * config_.agents : 3;
  if (image.rank() != 3 || image.dim(0) != expected || image.dim(1) != config_.height ||
      image.dim(2) != config_.width) {
    throw DimensionError("encode: expected image [" + std::to_string(expected) + "x" +
                         std::to_string(config_.height) + "x" + std::to_string(config_.width) +
                         "], got " + shape_string(image.shape()));
  }
  return run_encoder(image);
}

std::vector<Message> PerceptionModel::incoming_messages(const CommGraph& graph,
                                                        std::span<const Tensor> features, int dest,
                                                        int level, std::span<const RobotPose> poses) const {
  const auto nbrs = graph.neighbors(dest);
  const int param_level = config_.share_levels ? 0 : level;
  std::vector<Message> msgs;
  switch (config_.variant) {
    case Variant::kMp:
      for (int j : nbrs) msgs.push_back(plain_message(features[static_cast<std::size_t>(j)], j, dest, level));
      break;
    case Variant::kMpPose: {
      const FilmWeights film = FilmWeights::from(params_, film_prefix(param_level));
      for (int j : nbrs) {
        // m_{j->dest} is conditioned on the pose of dest in j's frame.
        const auto rel = relative_pose(poses[static_cast<std::size_t>(j)], poses[static_cast<std::size_t>(dest)]);
        const FilmParams fp = film_generate(encode_continuous_pose(rel).to_tensor(), film);
        msgs.push_back({film_message(features[static_cast<std::size_t>(j)], fp), j, dest, level});
      }
      break;
    }
    case Variant::kMpAtt: {
      std::vector<AttentionHead> heads;
      for (int d = 0; d < config_.heads; ++d) heads.push_back(AttentionHead::from(params_, head_prefix(param_level, d)));
      std::vector<NodeRef> senders;
      for (int j : nbrs) senders.push_back({j, features[static_cast<std::size_t>(j)]});
      msgs = attention_messages({dest, features[static_cast<std::size_t>(dest)]}, senders, heads, level);
      break;
    }
    default:
      throw ConfigError("variant " + to_string(config_.variant) + " does not pass messages");
  }
  return msgs;
}

std::vector<Tensor> PerceptionModel::message_passing_round(const CommGraph& graph,
                                                           std::span<const Tensor> features, int level,
                                                           std::span<const RobotPose> poses) const {
  const int n = graph.node_count();
  if (static_cast<int>(features.size()) != n) {
    throw DimensionError("message_passing_round: " + std::to_string(features.size()) +
                         " features for a graph of " + std::to_string(n) + " nodes");
  }
  for (const Tensor& f : features) {
    if (f.shape() != features[0].shape()) {
      throw DimensionError("message_passing_round: node features disagree in shape: " +
                           shape_string(f.shape()) + " vs " + shape_string(features[0].shape()));
    }
  }
  if (config_.variant == Variant::kMpPose && static_cast<int>(poses.size()) != n) {
    throw ConfigError("mp-pose needs one pose per node (got " + std::to_string(poses.size()) + ")");
  }
  std::vector<Tensor> next;
  next.reserve(features.size());
  for (int i = 0; i < n; ++i) {
    if (graph.neighbors(i).empty()) {
      next.push_back(features[static_cast<std::size_t>(i)]);
      continue;
    }
    std::vector<Tensor> values;
    for (auto& m : incoming_messages(graph, features, i, level, poses)) values.push_back(std::move(m.value));
    next.push_back(mean_of(values));
  }
  return next;
}

Tensor PerceptionModel::decode(const Tensor& h0, const Tensor& hl) const {
  const Shape expected = {config_.channels, config_.feature_height(), config_.feature_width()};
  if (h0.shape() != expected || hl.shape() != expected) {
    throw DimensionError("decode: expected features " + shape_string(expected) + ", got " +
                         shape_string(h0.shape()) + " and " + shape_string(hl.shape()));
  }
  const std::array<Tensor, 2> pair = {h0, hl};
  Tensor x = concat(pair);
  for (std::size_t i = 0; i < kDecoder.size(); ++i) {
    const auto& layer = kDecoder[i];
    const Tensor& w = params_.get(std::string(layer.name) + ".weight");
    const Tensor& b = params_.get(std::string(layer.name) + ".bias");
    x = layer.transposed ? conv_transpose2d(x, w, b, layer.stride, layer.padding)
                         : conv2d(x, w, b, layer.stride, layer.padding);
    if (i + 1 < kDecoder.size()) x = activation(x, Activation::relu());
  }
  if (config_.task == Task::kDepth && config_.variant != Variant::kBaselineMp) {
    return reshape(softplus(x), {config_.height, config_.width});
  }
  return x;
}

std::vector<Tensor> PerceptionModel::forward(const CommGraph& graph, std::span<const Tensor> images,
                                             std::span<const RobotPose> poses) const {
  if (config_.variant == Variant::kBaselineMp) return baseline_mp_forward(images);
  if (static_cast<int>(images.size()) != graph.node_count()) {
    throw DimensionError("forward: " + std::to_string(images.size()) + " images for " +
                         std::to_string(graph.node_count()) + " graph nodes");
  }
  if (config_.variant == Variant::kBaseline) {
    std::vector<Tensor> out;
    for (const Tensor& x : images) out.push_back(baseline_forward(x));
    return out;
  }
  if (config_.variant == Variant::kMpPose && poses.size() != images.size()) {
    throw ConfigError("mp-pose forward requires one pose per robot");
  }
  const std::span<const RobotPose> used_poses =
      config_.variant == Variant::kMpPose ? poses : std::span<const RobotPose>{};

  std::vector<Tensor> h0;
  h0.reserve(images.size());
  for (const Tensor& x : images) h0.push_back(encode(x));
  std::vector<Tensor> h = h0;
  for (int l = 0; l < config_.levels; ++l) h = message_passing_round(graph, h, l, used_poses);

  std::vector<Tensor> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) out.push_back(decode(h0[i], h[i]));
  return out;
}

Tensor PerceptionModel::baseline_forward(const Tensor& image) const {
  if (config_.variant == Variant::kBaselineMp) throw ConfigError("baseline_forward on a baseline-mp model");
  const Tensor h0 = encode(image);
  return decode(h0, h0);
}

std::vector<Tensor> PerceptionModel::baseline_mp_forward(std::span<const Tensor> images) const {
  if (config_.variant != Variant::kBaselineMp) throw ConfigError("baseline_mp_forward needs a baseline-mp model");
  if (static_cast<int>(images.size()) != config_.agents) {
    throw DimensionError("baseline-mp was built for " + std::to_string(config_.agents) + " images, got " +
                         std::to_string(images.size()));
  }
  const Tensor h = encode(concat(images));
  const Tensor y = decode(h, h);
  const int k = config_.output_channels();
  std::vector<Tensor> out;
  for (int a = 0; a < config_.agents; ++a) {
    Tensor part = slice(y, a * k, (a + 1) * k);
    if (config_.task == Task::kDepth) part = reshape(softplus(part), {config_.height, config_.width});
    out.push_back(part);
  }
  return out;
}

namespace {
constexpr std::string_view kCheckpointMagic = "MRCPCKPT";
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const ParamStore& params, const std::string& path) {
  io::Writer w;
  w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.put<std::uint32_t>(kCheckpointVersion);
  for (const auto& [name, entry] : params.entries()) {
    w.string(name);
    const Tensor& t = entry.value;
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.bytes(t.data().data(), t.numel() * sizeof(double));
  }
  w.finish(path);
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path) {
  io::Reader r(path, kCheckpointMagic, kCheckpointVersion);
  std::vector<std::pair<std::string, Tensor>> out;
  while (!r.at_end()) {
    std::string name = r.string();
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw FormatError(path + ": implausible rank " + std::to_string(rank) + " for " + name);
    Shape shape;
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = r.get<std::uint32_t>();
      if (d == 0 || d > (1u << 24)) throw FormatError(path + ": invalid dimension in " + name);
      shape.push_back(static_cast<int>(d));
      n *= d;
    }
    if (n * sizeof(double) > r.remaining()) throw FormatError(path + ": payload of " + name + " truncated");
    std::vector<double> values(n);
    std::memcpy(values.data(), r.take(n * sizeof(double)), n * sizeof(double));
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

void load_checkpoint(ParamStore& params, const std::string& path) {
  auto records = read_checkpoint(path);
  if (records.size() != params.size()) {
    throw ConfigError(path + ": checkpoint has " + std::to_string(records.size()) +
                      " parameters, model expects " + std::to_string(params.size()));
  }
  for (auto& [name, value] : records) {
    if (!params.contains(name)) throw ConfigError(path + ": unexpected parameter " + name);
    Tensor& slot = params.get(name);
    if (slot.shape() != value.shape()) {
      throw ConfigError(path + ": parameter " + name + " has shape " + shape_string(value.shape()) +
                        ", model expects " + shape_string(slot.shape()));
    }
    std::copy(value.data().begin(), value.data().end(), slot.mutable_data().begin());
  }
}

}  // namespace mrcp
