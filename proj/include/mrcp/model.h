// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// The collaborative perception network: a shared CNN encoder per robot, L
// synchronous rounds of message passing over the communication graph with
// average aggregation, and a decoder fed with the skip pair [h^0 || h^L].

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrcp/geometry.h"
#include "mrcp/messages.h"
#include "mrcp/optim.h"
#include "mrcp/tensor.h"

namespace mrcp {

enum class Variant { kBaseline, kBaselineMp, kMp, kMpPose, kMpAtt };
enum class Task { kDepth, kSegmentation };

std::string to_string(Variant v);
std::string to_string(Task t);
Variant parse_variant(const std::string& name);
Task parse_task(const std::string& name);
bool uses_graph(Variant v);

struct ModelConfig {
  Variant variant = Variant::kMpPose;
  Task task = Task::kDepth;
  int levels = 1;
  int channels = 32;
  int heads = 4;
  int height = 64;
  int width = 64;
  int class_count = 1;  // segmentation classes; ignored for depth
  int agents = 5;       // input count of baseline-mp
  bool share_levels = true;
  int film_hidden = 64;

  int output_channels() const { return task == Task::kDepth ? 1 : class_count; }
  int feature_height() const { return height / 8; }
  int feature_width() const { return width / 8; }
  // Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

class PerceptionModel {
 public:
  PerceptionModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // 3 x H x W image -> C x H/8 x W/8 node feature.
  Tensor encode(const Tensor& image) const;

  // One round of h_i <- mean_{j in N(i)} m_ji. Isolated nodes keep h_i.
  std::vector<Tensor> message_passing_round(const CommGraph& graph, std::span<const Tensor> features,
                                            int level, std::span<const RobotPose> poses = {}) const;

  // Depth: H x W (softplus, strictly positive). Segmentation: K x H x W logits.
  Tensor decode(const Tensor& h0, const Tensor& hl) const;

  // Dispatches on the configured variant. mp-pose requires one pose per node.
  std::vector<Tensor> forward(const CommGraph& graph, std::span<const Tensor> images,
                              std::span<const RobotPose> poses = {}) const;

  Tensor baseline_forward(const Tensor& image) const;
  std::vector<Tensor> baseline_mp_forward(std::span<const Tensor> images) const;

 private:
  std::string film_prefix(int level) const;
  std::string head_prefix(int level, int head) const;
  std::vector<Message> incoming_messages(const CommGraph& graph, std::span<const Tensor> features,
                                         int dest, int level, std::span<const RobotPose> poses) const;
  Tensor run_encoder(const Tensor& image) const;

  ModelConfig config_;
  ParamStore params_;
};

// Binary checkpoint: "MRCPCKPT", u32 version, then per parameter
// (u32 name length, name, u32 rank, u32 dims, f64 payload), all little
// endian, followed by a CRC32 of every preceding byte.
void save_checkpoint(const ParamStore& params, const std::string& path);
std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path);
// Copies checkpoint values into `params`; names and shapes must match exactly.
void load_checkpoint(ParamStore& params, const std::string& path);

}  // namespace mrcp
