// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable tensor operations. Every function here records itself on the
// active tape (see tensor.h) when one of its operands requires a gradient.
// Image-like tensors are laid out channel-major: C x H x W.

#pragma once

#include <span>
#include <vector>

#include "mrcp/tensor.h"

namespace mrcp {

enum class ActivationKind { kRelu, kLeakyRelu, kExp, kAbs };

struct Activation {
  ActivationKind kind = ActivationKind::kRelu;
  double slope = 0.2;  // leaky branch only

  static Activation relu() { return {ActivationKind::kRelu, 0.0}; }
  static Activation leaky_relu(double slope = 0.2) { return {ActivationKind::kLeakyRelu, slope}; }
  static Activation exp() { return {ActivationKind::kExp, 0.0}; }
  static Activation abs() { return {ActivationKind::kAbs, 0.0}; }
};

// Elementwise arithmetic; operands must have identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

// s * t for a scalar tensor s.
Tensor scale_by(const Tensor& s, const Tensor& t);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);
Tensor flatten(const Tensor& a);
// Concatenates along axis 0. Trailing dimensions must agree.
Tensor concat(std::span<const Tensor> parts);
// Rows [begin, end) along axis 0.
Tensor slice(const Tensor& a, int begin, int end);
// Element `index` of a flat view, as a scalar.
Tensor select(const Tensor& a, std::size_t index);

// Elementwise mean of equally shaped tensors. Each element is summed in
// ascending value order with compensation, so the result does not depend on
// the order of `parts` and the mean of identical inputs is exact.
Tensor mean_of(std::span<const Tensor> parts);

// weight * input + bias, input [n], weight [m x n], bias [m].
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

// Cross-correlation. input [Cin x H x W], kernel [Cout x Cin x k x k], bias [Cout].
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding);

// Adjoint of conv2d. input [Cin x H x W], kernel [Cin x Cout x k x k], bias [Cout];
// output side (H - 1) * stride - 2 * padding + k.
Tensor conv_transpose2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                        int stride, int padding);

Tensor activation(const Tensor& input, Activation act);
Tensor softplus(const Tensor& input);

// Softmax over a 1-D tensor.
Tensor softmax(const Tensor& scores);

// Softmax over a list of scalar tensors.
std::vector<Tensor> softmax_normalize(std::span<const Tensor> scores);

// Per-channel affine map: out[k] = a[k] * h[k] + b[k] over the spatial plane.
Tensor channel_affine(const Tensor& h, const Tensor& a, const Tensor& b);

// Forward differences along the last (x) or second-to-last (y) axis.
Tensor diff_x(const Tensor& a);
Tensor diff_y(const Tensor& a);

// Elementwise smooth-L1 of a residual: 0.5 d^2 / beta below beta, |d| - beta / 2 above.
Tensor huber(const Tensor& residual, double beta);

// Mean over pixels of -log softmax(logits)[target]. logits [K x H x W],
// targets holds H*W class ids.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);

}  // namespace mrcp
