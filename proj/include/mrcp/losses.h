// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable task losses for depth regression and segmentation.

#pragma once

#include <span>

#include "mrcp/tensor.h"

namespace mrcp {

struct LossConfig {
  double alpha_smooth = 1e-3;  // weight of the edge-aware term
  double beta = 1.0;           // smooth-L1 transition point

  // Throws ConfigError unless alpha_smooth >= 0 and beta > 0.
  void validate() const;
};

// Mean over pixels of 0.5 d^2 / beta when |d| < beta, else |d| - 0.5 beta.
Tensor smooth_l1(const Tensor& pred, const Tensor& target, double beta);

// Mean of |dx y| exp(-|dx x|) over horizontal pixel pairs plus the same term
// over vertical pairs. Image gradients are averaged over channels and treated
// as constants.
Tensor edge_aware_smoothness(const Tensor& pred, const Tensor& image);

Tensor depth_loss(const Tensor& image, const Tensor& pred, const Tensor& target, const LossConfig& cfg);

// Mean per-pixel cross entropy of K x H x W logits against H x W class ids.
Tensor seg_loss(const Tensor& logits, std::span<const int> target);

// Arithmetic mean of per-robot scalar losses; independent of argument order.
Tensor total_loss(std::span<const Tensor> losses);

}  // namespace mrcp
