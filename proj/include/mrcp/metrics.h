// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics. Accumulators pool pixels across frames so an eval split
// reports one number per metric.

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mrcp {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
};

// Pixels count as valid when 0 < target < max_valid. Throws MetricError when
// no pixel is valid or the spans differ in length.
DepthMetrics depth_metrics(std::span<const double> pred, std::span<const double> target,
                           double max_valid = std::numeric_limits<double>::infinity());

class DepthAccumulator {
 public:
  explicit DepthAccumulator(double max_valid = std::numeric_limits<double>::infinity())
      : max_valid_(max_valid) {}
  void add(std::span<const double> pred, std::span<const double> target);
  std::size_t count() const { return count_; }
  DepthMetrics result() const;

 private:
  double max_valid_;
  double abs_rel_ = 0.0;
  double sq_rel_ = 0.0;
  double sq_ = 0.0;
  std::size_t count_ = 0;
};

// Mean over classes present in pred or target of TP / (TP + FP + FN).
double miou(std::span<const int> pred, std::span<const int> target, int class_count);

class ConfusionCounts {
 public:
  explicit ConfusionCounts(int class_count);
  void add(std::span<const int> pred, std::span<const int> target);
  double miou() const;
  int class_count() const { return static_cast<int>(tp_.size()); }

 private:
  std::vector<std::uint64_t> tp_, fp_, fn_;
};

// Per-pixel argmax over the leading axis of K x H x W scores.
std::vector<int> argmax_classes(std::span<const double> scores, int class_count);

}  // namespace mrcp
