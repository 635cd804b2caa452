// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit tests.

#pragma once

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <random>
#include <vector>

#include "mrcp/geometry.h"
#include "mrcp/grad_check.h"
#include "mrcp/tensor.h"
#include "oracles.h"

namespace mrcp::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), oracle::random_values(n, gen, lo, hi));
}

inline std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

inline void expect_grad_ok(const ScalarFn& f, const Tensor& point, double tol = 1e-4) {
  const GradCheckResult r = grad_check(f, point, GradCheckOptions{1e-5, 0, 0});
  EXPECT_GT(r.checked, 0u);
  EXPECT_LT(r.max_relative_error, tol) << "worst component " << r.worst_index << " analytic " << r.worst_analytic
                                       << " numeric " << r.worst_numeric;
}

inline Mat3 random_rotation(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(gen), n(gen), n(gen), n(gen));
  q.normalize();
  return q.toRotationMatrix();
}

inline RobotPose random_pose(std::mt19937_64& gen, double extent = 5.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return {Vec3(u(gen), u(gen), u(gen)), random_rotation(gen)};
}

}  // namespace mrcp::testing
