// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/messages.h"

#include <Eigen/Geometry>
#include <cmath>

#include "mrcp/errors.h"
#include "mrcp/ops.h"

namespace mrcp {

Mat3 ContinuousRelPose::rotation() const {
  const Vec3 c1(values[3], values[4], values[5]);
  const Vec3 c2(values[6], values[7], values[8]);
  Mat3 r;
  r.col(0) = c1;
  r.col(1) = c2;
  r.col(2) = c1.cross(c2);
  return r;
}

Tensor ContinuousRelPose::to_tensor() const {
  return Tensor({9}, std::vector<double>(values.begin(), values.end()));
}

ContinuousRelPose encode_continuous_pose(const Mat3& rotation, const Vec3& translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InputError("encode_continuous_pose: non-finite pose");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9) throw InputError("encode_continuous_pose: rotation is not orthonormal");
  ContinuousRelPose p;
  p.values = {translation.x(),    translation.y(),    translation.z(),
              rotation(0, 0),     rotation(1, 0),     rotation(2, 0),
              rotation(0, 1),     rotation(1, 1),     rotation(2, 1)};
  return p;
}

void FilmWeights::init(ParamStore& params, const std::string& prefix, int channels, int hidden,
                       Rng& rng) {
  params.add_uniform(prefix + ".fc1.weight", {hidden, 9}, 9, rng);
  params.add_uniform(prefix + ".fc1.bias", {hidden}, 9, rng);
  params.add_uniform(prefix + ".fc2.weight", {2 * channels, hidden}, hidden, rng);
  params.add_uniform(prefix + ".fc2.bias", {2 * channels}, hidden, rng);
}

FilmWeights FilmWeights::from(const ParamStore& params, const std::string& prefix) {
  return {params.get(prefix + ".fc1.weight"), params.get(prefix + ".fc1.bias"),
          params.get(prefix + ".fc2.weight"), params.get(prefix + ".fc2.bias")};
}

FilmParams film_generate(const Tensor& pose, const FilmWeights& weights) {
  if (pose.numel() != 9) throw DimensionError("film_generate: pose must have 9 values, got " + shape_string(pose.shape()));
  if (weights.w1.rank() != 2 || weights.w1.dim(1) != 9 || weights.w2.rank() != 2 ||
      weights.w2.dim(1) != weights.w1.dim(0) || weights.w2.dim(0) % 2 != 0) {
    throw DimensionError("film_generate: spatial encoder weights " + shape_string(weights.w1.shape()) +
                         " / " + shape_string(weights.w2.shape()) + " are not 9 -> hidden -> 2C");
  }
  const Tensor hidden = activation(linear(reshape(pose, {9}), weights.w1, weights.b1), Activation::relu());
  const Tensor out = linear(hidden, weights.w2, weights.b2);
  const int c = weights.w2.dim(0) / 2;
  return {slice(out, 0, c), slice(out, c, 2 * c)};
}

Tensor film_message(const Tensor& feature, const FilmParams& params) {
  if (feature.rank() != 3 || params.a.numel() != static_cast<std::size_t>(feature.dim(0))) {
    throw DimensionError("film_message: feature " + shape_string(feature.shape()) +
                         " has a different channel count than FiLM parameters " +
                         shape_string(params.a.shape()));
  }
  return channel_affine(feature, params.a, params.b);
}

int AttentionHead::reduced_extent(int extent) {
  for (int i = 0; i < 2; ++i) extent = (extent + 2 - 3) / 2 + 1;
  return extent;
}

void AttentionHead::init(ParamStore& params, const std::string& prefix, int channels, int height,
                         int width, Rng& rng) {
  const int c2 = 2 * channels;
  params.add_uniform(prefix + ".conv1.weight", {channels, c2, 3, 3}, c2 * 9, rng);
  params.add_uniform(prefix + ".conv1.bias", {channels}, c2 * 9, rng);
  params.add_uniform(prefix + ".conv2.weight", {channels, channels, 3, 3}, channels * 9, rng);
  params.add_uniform(prefix + ".conv2.bias", {channels}, channels * 9, rng);
  const int flat = channels * reduced_extent(height) * reduced_extent(width);
  params.add_uniform(prefix + ".fc.weight", {1, flat}, flat, rng);
  params.add_uniform(prefix + ".fc.bias", {1}, flat, rng);
}

AttentionHead AttentionHead::from(const ParamStore& params, const std::string& prefix) {
  return {params.get(prefix + ".conv1.weight"), params.get(prefix + ".conv1.bias"),
          params.get(prefix + ".conv2.weight"), params.get(prefix + ".conv2.bias"),
          params.get(prefix + ".fc.weight"),    params.get(prefix + ".fc.bias")};
}

Tensor attention_score(const Tensor& sender, const Tensor& dest, const AttentionHead& head,
                       double slope) {
  if (sender.shape() != dest.shape()) {
    throw DimensionError("attention_score: feature shapes differ: " + shape_string(sender.shape()) +
                         " vs " + shape_string(dest.shape()));
  }
  const std::array<Tensor, 2> pair = {sender, dest};
  Tensor x = concat(pair);
  x = conv2d(x, head.conv1_w, head.conv1_b, 2, 1);
  x = conv2d(x, head.conv2_w, head.conv2_b, 2, 1);
  x = linear(flatten(x), head.fc_w, head.fc_b);
  return reshape(activation(x, Activation::leaky_relu(slope)), {});
}

Message plain_message(const Tensor& feature, int source, int destination, int level) {
  return {feature, source, destination, level};
}

std::vector<Message> attention_messages(const NodeRef& dest, std::span<const NodeRef> neighbors,
                                        std::span<const AttentionHead> heads, int level,
                                        std::vector<std::vector<double>>* weights) {
  if (neighbors.empty()) {
    throw ContractViolation("attention_messages: node " + std::to_string(dest.index) + " has no neighbors");
  }
  if (heads.empty()) throw ContractViolation("attention_messages: need at least one head");
  if (weights != nullptr) weights->assign(heads.size(), {});

  // per_head[d][n] = softmax_n(alpha^d) * h_n
  std::vector<std::vector<Tensor>> per_head(heads.size());
  for (std::size_t d = 0; d < heads.size(); ++d) {
    std::vector<Tensor> scores;
    scores.reserve(neighbors.size());
    for (const auto& nb : neighbors) scores.push_back(attention_score(nb.feature, dest.feature, heads[d]));
    const std::vector<Tensor> w = softmax_normalize(scores);
    for (std::size_t n = 0; n < neighbors.size(); ++n) {
      per_head[d].push_back(scale_by(w[n], neighbors[n].feature));
      if (weights != nullptr) (*weights)[d].push_back(w[n].item());
    }
  }

  std::vector<Message> out;
  out.reserve(neighbors.size());
  for (std::size_t n = 0; n < neighbors.size(); ++n) {
    std::vector<Tensor> heads_for_edge;
    heads_for_edge.reserve(heads.size());
    for (std::size_t d = 0; d < heads.size(); ++d) heads_for_edge.push_back(per_head[d][n]);
    out.push_back({mean_of(heads_for_edge), neighbors[n].index, dest.index, level});
  }
  return out;
}

}  // namespace mrcp
