// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/losses.h"

#include <cmath>

#include "mrcp/errors.h"
#include "mrcp/ops.h"

namespace mrcp {
namespace {

// exp(-mean_c |forward difference of the image|), shaped like the matching
// depth gradient.
Tensor image_edge_weights(const Tensor& image, bool along_x) {
  const int c = image.dim(0);
  const int h = image.dim(1);
  const int w = image.dim(2);
  const int oh = along_x ? h : h - 1;
  const int ow = along_x ? w - 1 : w;
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  const auto px = image.data();
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const std::size_t a = (static_cast<std::size_t>(ch) * h + y) * w + x;
        const std::size_t b = along_x ? a + 1 : a + static_cast<std::size_t>(w);
        out[static_cast<std::size_t>(y) * ow + x] += std::abs(px[b] - px[a]);
      }
    }
  }
  for (double& v : out) v = std::exp(-v / c);
  return Tensor({oh, ow}, std::move(out));
}

}  // namespace

void LossConfig::validate() const {
  if (!(alpha_smooth >= 0.0)) throw ConfigError("alpha_smooth must be non-negative");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
}

Tensor smooth_l1(const Tensor& pred, const Tensor& target, double beta) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("smooth_l1: prediction " + shape_string(pred.shape()) + " vs target " +
                         shape_string(target.shape()));
  }
  if (!(beta > 0.0)) throw InputError("smooth_l1: beta must be positive");
  return mean(huber(sub(pred, target), beta));
}

Tensor edge_aware_smoothness(const Tensor& pred, const Tensor& image) {
  if (pred.rank() != 2 || image.rank() != 3 || image.dim(1) != pred.dim(0) || image.dim(2) != pred.dim(1)) {
    throw DimensionError("edge_aware_smoothness: depth " + shape_string(pred.shape()) + " and image " +
                         shape_string(image.shape()) + " disagree spatially");
  }
  if (pred.dim(0) < 2 || pred.dim(1) < 2) {
    throw DimensionError("edge_aware_smoothness: need at least 2x2 pixels");
  }
  const Tensor gx = activation(diff_x(pred), Activation::abs());
  const Tensor gy = activation(diff_y(pred), Activation::abs());
  return add(mean(mul(gx, image_edge_weights(image, true))), mean(mul(gy, image_edge_weights(image, false))));
}

Tensor depth_loss(const Tensor& image, const Tensor& pred, const Tensor& target, const LossConfig& cfg) {
  cfg.validate();
  const Tensor l1 = smooth_l1(pred, target, cfg.beta);
  if (cfg.alpha_smooth == 0.0) return l1;
  return add(l1, scale(edge_aware_smoothness(pred, image), cfg.alpha_smooth));
}

Tensor seg_loss(const Tensor& logits, std::span<const int> target) { return cross_entropy(logits, target); }

Tensor total_loss(std::span<const Tensor> losses) {
  if (losses.empty()) throw InputError("total_loss: no per-robot losses");
  for (const Tensor& l : losses) {
    if (!l.is_scalar()) throw DimensionError("total_loss: expected scalars, got " + shape_string(l.shape()));
  }
  std::vector<Tensor> flat;
  flat.reserve(losses.size());
  for (const Tensor& l : losses) flat.push_back(reshape(l, {}));
  return mean_of(flat);
}

}  // namespace mrcp
