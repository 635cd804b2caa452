// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/metrics.h"

#include <cmath>
#include <string>

#include "mrcp/errors.h"

namespace mrcp {

void DepthAccumulator::add(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw MetricError("depth metrics: " + std::to_string(pred.size()) + " predictions for " +
                      std::to_string(target.size()) + " targets");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double t = target[i];
    if (!(t > 0.0 && t < max_valid_)) continue;
    const double d = pred[i] - t;
    abs_rel_ += std::abs(d) / t;
    sq_rel_ += d * d / t;
    sq_ += d * d;
    ++count_;
  }
}

DepthMetrics DepthAccumulator::result() const {
  if (count_ == 0) throw MetricError("depth metrics: no valid target pixels");
  const auto n = static_cast<double>(count_);
  return {abs_rel_ / n, sq_rel_ / n, std::sqrt(sq_ / n)};
}

DepthMetrics depth_metrics(std::span<const double> pred, std::span<const double> target, double max_valid) {
  DepthAccumulator acc(max_valid);
  acc.add(pred, target);
  return acc.result();
}

ConfusionCounts::ConfusionCounts(int class_count) {
  if (class_count < 1) throw MetricError("miou: class count must be positive");
  tp_.assign(static_cast<std::size_t>(class_count), 0);
  fp_ = tp_;
  fn_ = tp_;
}

void ConfusionCounts::add(std::span<const int> pred, std::span<const int> target) {
  if (pred.size() != target.size()) throw MetricError("miou: prediction and target lengths differ");
  const int k = class_count();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i];
    const int t = target[i];
    if (p < 0 || p >= k || t < 0 || t >= k) {
      throw MetricError("miou: class id out of range [0," + std::to_string(k) + ")");
    }
    if (p == t) {
      ++tp_[static_cast<std::size_t>(p)];
    } else {
      ++fp_[static_cast<std::size_t>(p)];
      ++fn_[static_cast<std::size_t>(t)];
    }
  }
}

double ConfusionCounts::miou() const {
  double total = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < tp_.size(); ++c) {
    const std::uint64_t denom = tp_[c] + fp_[c] + fn_[c];
    if (denom == 0) continue;
    total += static_cast<double>(tp_[c]) / static_cast<double>(denom);
    ++present;
  }
  if (present == 0) throw MetricError("miou: no pixels");
  return total / present;
}

double miou(std::span<const int> pred, std::span<const int> target, int class_count) {
  ConfusionCounts counts(class_count);
  counts.add(pred, target);
  return counts.miou();
}

std::vector<int> argmax_classes(std::span<const double> scores, int class_count) {
  if (class_count < 1 || scores.size() % static_cast<std::size_t>(class_count) != 0) {
    throw DimensionError("argmax_classes: score count is not a multiple of the class count");
  }
  const std::size_t plane = scores.size() / static_cast<std::size_t>(class_count);
  std::vector<int> out(plane, 0);
  for (std::size_t i = 0; i < plane; ++i) {
    double best = scores[i];
    for (int c = 1; c < class_count; ++c) {
      const double v = scores[static_cast<std::size_t>(c) * plane + i];
      if (v > best) {
        best = v;
        out[i] = c;
      }
    }
  }
  return out;
}

}  // namespace mrcp
