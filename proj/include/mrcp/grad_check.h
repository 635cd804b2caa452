// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "mrcp/tensor.h"

namespace mrcp {

using ScalarFn = std::function<Tensor(const Tensor&)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  // 0 checks every component; otherwise a seeded random subset of this size.
  std::size_t max_components = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Components whose +-epsilon probes flipped an activation branch.
  std::size_t skipped_at_kink = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares reverse-mode gradients of scalar `f` at `point` with central
// differences. Relative error divides by the largest of |analytic|,
// |numeric|, 1e-8 and 1e6 * u * |f| / epsilon (u = machine epsilon), so a
// component is never scored on roundoff alone. Throws EvaluationError if
// f(point) is not finite.
GradCheckResult grad_check(const ScalarFn& f, const Tensor& point, const GradCheckOptions& options);

inline double grad_check(const ScalarFn& f, const Tensor& point, double epsilon) {
  return grad_check(f, point, GradCheckOptions{epsilon, 0, 0}).max_relative_error;
}

}  // namespace mrcp
