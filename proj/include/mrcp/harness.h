// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training and evaluation driver, simulated message exchange accounting and
// experiment configuration.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrcp/dataset.h"
#include "mrcp/geometry.h"
#include "mrcp/losses.h"
#include "mrcp/metrics.h"
#include "mrcp/model.h"
#include "mrcp/noise.h"
#include "mrcp/optim.h"

namespace mrcp {

struct TrainConfig {
  std::string dataset;
  std::string output_dir = "run";
  ModelConfig model;
  // Dataset dims are used unless set; a set value must match the dataset.
  std::optional<int> height, width, agents, class_count;
  LossConfig loss;
  AdamConfig adam;
  int epochs = 30;
  int batch_size = 1;  // frames per optimizer step
  std::uint64_t seed = 1;
  int train_noisy_cameras = 0;  // per step, drawn uniformly from [0, this]
  int eval_noisy_cameras = 2;   // evaluate every setting in [0, this]
  std::uint64_t eval_seed = 0xe7a1;
  double eval_fraction = 0.2;
  int eval_every = 1;  // epochs; the last epoch is always evaluated
  std::string noise;   // empty: use the dataset's noise descriptor
  double comm_range = 0.0;  // 0: complete graph
  int max_train_frames = 0;  // 0: all

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Applies one `key = value` setting.
void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value);
// Parses line-oriented `key = value` text with `#` comments.
TrainConfig parse_train_config(const std::string& text, const std::string& origin = "<config>");
TrainConfig load_train_config(const std::string& path);
std::string render_train_config(const TrainConfig& cfg);

// Resolves dataset-dependent fields and checks consistency with the manifest.
ModelConfig resolve_model_config(const TrainConfig& cfg, const DatasetManifest& manifest);

struct Split {
  std::vector<int> train;
  std::vector<int> eval;
};
// Deterministic seeded 80/20-style split of frame indices.
Split split_frames(int frame_count, std::uint64_t seed, double eval_fraction);

// Tensors and targets for one frame.
struct FrameInputs {
  std::vector<Tensor> images;       // 3 x H x W, possibly corrupted
  std::vector<Tensor> clean_images;
  std::vector<RobotPose> poses;
  CommGraph graph;
  std::vector<Tensor> depth;             // H x W
  std::vector<std::vector<int>> seg;     // H*W class ids
};

FrameInputs frame_inputs(const FrameSample& frame, int height, int width, double comm_range);

using Predictor = std::function<std::vector<Tensor>(const FrameInputs&)>;
Predictor model_predictor(const PerceptionModel& model);

struct MetricBundle {
  int noisy_cameras = 0;
  std::optional<DepthMetrics> depth;
  std::optional<double> miou;
};

struct EvalOptions {
  Task task = Task::kDepth;
  NoiseSpec noise;
  std::uint64_t seed = 0xe7a1;
  std::vector<int> noisy_settings = {0, 1, 2};
  double comm_range = 0.0;
};

// Metrics pooled over every robot of every listed frame. Corruption hits the
// cameras chosen by the noise spec and depends only on (seed, frame index).
std::vector<MetricBundle> evaluate(const Dataset& dataset, std::span<const int> frames,
                                   const Predictor& predictor, const EvalOptions& options);

struct EpisodeRow {
  int epoch = 0;
  std::string variant;
  std::string task;
  int noisy_cameras = 0;
  double train_loss = 0.0;
  MetricBundle metrics;
};

struct TrainResult {
  std::vector<EpisodeRow> log;
  std::vector<double> epoch_seconds;
  std::vector<double> step_losses;
  std::string checkpoint_path;
};

// Runs the full loop and writes checkpoint.mrcp, config.cfg, episode_log.tsv
// and timing.tsv into cfg.output_dir.
TrainResult train(const TrainConfig& cfg);

std::string format_episode_log(const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> parse_episode_log(const std::string& text);

struct BandwidthReport {
  std::uint64_t bytes_per_link_per_level = 0;
  std::uint64_t directed_links = 0;
  int levels = 0;
  std::uint64_t message_bytes_per_frame = 0;
  std::uint64_t raw_bytes_per_image = 0;
  std::uint64_t raw_bytes_per_frame = 0;  // every directed link carrying an image
  double ratio = 0.0;                     // one message over one raw image
};

inline constexpr double kReferenceMessageMBpf = 2.5;
inline constexpr double kReferenceRawMBpf = 6.0;

BandwidthReport simulate_exchange(const CommGraph& graph, const ModelConfig& cfg, int payload_width);
std::string format_bandwidth(const BandwidthReport& report);

// Aligned table: one row per variant (final evaluated epoch), columns
// Abs Rel, Sq Rel, RMSE and mIoU for each noisy-camera setting.
std::string format_report(const std::vector<EpisodeRow>& rows);

}  // namespace mrcp
