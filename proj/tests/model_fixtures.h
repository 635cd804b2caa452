// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tiny model configurations and the end-to-end gradient check shared by the
// model tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mrcp/geometry.h"
#include "mrcp/grad_check.h"
#include "mrcp/losses.h"
#include "mrcp/model.h"
#include "mrcp/ops.h"
#include "mrcp/scene.h"
#include "oracles.h"

namespace mrcp::testing {

inline ModelConfig tiny_config(Variant variant, Task task = Task::kDepth, int agents = 3) {
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.task = task;
  cfg.channels = 8;
  cfg.heads = 2;
  cfg.height = 16;
  cfg.width = 16;
  cfg.class_count = task == Task::kDepth ? 1 : 3;
  cfg.agents = agents;
  cfg.film_hidden = 16;
  return cfg;
}

struct TinyBatch {
  CommGraph graph;
  std::vector<Tensor> images;
  std::vector<Tensor> loss_images;  // edge-aware weights; held fixed
  std::vector<RobotPose> poses;
  std::vector<Tensor> depth;
  std::vector<std::vector<int>> labels;
};

inline TinyBatch tiny_batch(const ModelConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  TinyBatch b;
  const int n = cfg.agents;
  b.graph = CommGraph::complete(n);
  b.poses = formation_preset(FormationPreset::kPoseVaried, std::max(n, 2), 4.0, 4.0, seed);
  b.poses.resize(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> cls(0, cfg.class_count - 1);
  for (int i = 0; i < n; ++i) {
    b.images.emplace_back(Shape{3, cfg.height, cfg.width},
                          oracle::random_values(3u * cfg.height * cfg.width, gen, 0.0, 1.0));
    b.loss_images.push_back(b.images.back().detach());
    b.depth.emplace_back(Shape{cfg.height, cfg.width},
                         oracle::random_values(static_cast<std::size_t>(cfg.height) * cfg.width, gen, 0.5, 3.0));
    std::vector<int> l(static_cast<std::size_t>(cfg.height) * cfg.width);
    for (int& v : l) v = cls(gen);
    b.labels.push_back(std::move(l));
  }
  return b;
}

inline Tensor batch_loss(const PerceptionModel& model, const TinyBatch& b) {
  const std::vector<Tensor> out = model.forward(b.graph, b.images, b.poses);
  std::vector<Tensor> losses;
  for (std::size_t i = 0; i < out.size(); ++i) {
    losses.push_back(model.config().task == Task::kDepth ? depth_loss(b.loss_images[i], out[i], b.depth[i], LossConfig{})
                                                         : seg_loss(out[i], b.labels[i]));
  }
  return total_loss(losses);
}

struct EndToEndGradReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_at_kink = 0;
  std::string worst_tensor;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Finite-difference check of the full loss against every parameter tensor and
// the first robot's image, sampling up to `per_tensor` components of each.
inline EndToEndGradReport end_to_end_grad_check(const ModelConfig& cfg, std::uint64_t seed,
                                                std::size_t per_tensor) {
  const PerceptionModel model(cfg, seed);
  const TinyBatch batch = tiny_batch(cfg, seed + 1);
  EndToEndGradReport report;
  auto absorb = [&](const GradCheckResult& r, const std::string& name) {
    report.checked += r.checked;
    report.skipped_at_kink += r.skipped_at_kink;
    if (r.max_relative_error >= report.max_relative_error) {
      report.max_relative_error = r.max_relative_error;
      report.worst_tensor = name;
      report.worst_analytic = r.worst_analytic;
      report.worst_numeric = r.worst_numeric;
    }
  };
  const GradCheckOptions opts{1e-5, per_tensor, seed};
  for (const std::string& name : model.params().names()) {
    const auto r = grad_check(
        [&](const Tensor& x) {
          PerceptionModel m = model;
          m.params().replace(name, x);
          return batch_loss(m, batch);
        },
        model.params().get(name), opts);
    absorb(r, name);
  }
  const auto r = grad_check(
      [&](const Tensor& x) {
        TinyBatch b = batch;
        b.images[0] = x;
        return batch_loss(model, b);
      },
      batch.images[0], opts);
  absorb(r, "image0");
  return report;
}

}  // namespace mrcp::testing
