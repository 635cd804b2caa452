// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// The three message kinds exchanged between robots: plain node features,
// pose-conditioned (FiLM) features, and cross-attention weighted features.
// A message m_ij flows from sender i to destination j.

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mrcp/geometry.h"
#include "mrcp/optim.h"
#include "mrcp/tensor.h"

namespace mrcp {

// [t_x, t_y, t_z, first column of R, second column of R].
struct ContinuousRelPose {
  std::array<double, 9> values{};

  Vec3 translation() const { return {values[0], values[1], values[2]}; }
  // Rebuilds R with the third column as col1 x col2.
  Mat3 rotation() const;
  Tensor to_tensor() const;
};

// Throws InputError unless R is orthonormal within 1e-9.
ContinuousRelPose encode_continuous_pose(const Mat3& rotation, const Vec3& translation);
inline ContinuousRelPose encode_continuous_pose(const RelativePose& rel) {
  return encode_continuous_pose(rel.rotation, rel.translation);
}

// Spatial encoder: 9 -> hidden (ReLU) -> 2C.
struct FilmWeights {
  Tensor w1, b1, w2, b2;

  static void init(ParamStore& params, const std::string& prefix, int channels, int hidden, Rng& rng);
  static FilmWeights from(const ParamStore& params, const std::string& prefix);
};

// Per-channel scale `a` and shift `b`, each [C].
struct FilmParams {
  Tensor a;
  Tensor b;
};

FilmParams film_generate(const Tensor& pose, const FilmWeights& weights);
Tensor film_message(const Tensor& feature, const FilmParams& params);

// Transform module of one attention head: two stride-2 3x3 convolutions
// (2C -> C -> C), flatten, and a single-row fully connected layer.
struct AttentionHead {
  Tensor conv1_w, conv1_b, conv2_w, conv2_b, fc_w, fc_b;

  static void init(ParamStore& params, const std::string& prefix, int channels, int height,
                   int width, Rng& rng);
  static AttentionHead from(const ParamStore& params, const std::string& prefix);
  // Spatial size after the two stride-2 convolutions.
  static int reduced_extent(int extent);
};

inline constexpr double kAttentionSlope = 0.2;

// alpha = LeakyReLU(F[h_sender || h_dest]).
Tensor attention_score(const Tensor& sender, const Tensor& dest, const AttentionHead& head,
                       double slope = kAttentionSlope);

struct Message {
  Tensor value;
  int source = 0;
  int destination = 0;
  int level = 0;
};

struct NodeRef {
  int index = 0;
  Tensor feature;
};

Message plain_message(const Tensor& feature, int source, int destination, int level);

// Messages into `dest` from every neighbor: per head the scores are
// softmax-normalized over the incoming edges, head messages are weight * h_i,
// and the final message averages the heads. When `weights` is non-null it
// receives the per-head normalized weights, indexed [head][neighbor].
std::vector<Message> attention_messages(const NodeRef& dest, std::span<const NodeRef> neighbors,
                                        std::span<const AttentionHead> heads, int level,
                                        std::vector<std::vector<double>>* weights = nullptr);

}  // namespace mrcp
