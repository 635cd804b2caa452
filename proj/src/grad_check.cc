// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/grad_check.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mrcp/errors.h"
#include "mrcp/rng.h"

namespace mrcp {
namespace {

constexpr double kRoundoffScale = 1e6;

struct Probe {
  double value;
  std::uint64_t fingerprint;
};

Probe evaluate(const ScalarFn& f, const Tensor& x) {
  KinkMonitor monitor;
  const Tensor y = f(x);
  if (!y.is_scalar()) throw ContractViolation("grad_check: function is not scalar-valued");
  return {y.item(), monitor.fingerprint()};
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, const Tensor& point, const GradCheckOptions& options) {
  Tensor x = point.detach();
  x.set_requires_grad(true);

  Tape tape;
  Tensor y;
  std::uint64_t base_print = 0;
  {
    TapeScope scope(tape);
    KinkMonitor monitor;
    y = f(x);
    base_print = monitor.fingerprint();
  }
  if (!y.is_scalar()) throw ContractViolation("grad_check: function is not scalar-valued");
  if (!std::isfinite(y.item())) throw EvaluationError("grad_check: f(point) is not finite");
  std::vector<double> analytic(x.numel(), 0.0);
  if (y.on_tape()) {
    backward(y, tape);
    if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
  }

  std::vector<std::size_t> order(x.numel());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.max_components != 0 && options.max_components < order.size()) {
    Rng rng(options.seed);
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(options.max_components);
    std::sort(order.begin(), order.end());
  }

  GradCheckResult result;
  const double eps = options.epsilon;
  for (std::size_t i : order) {
    Tensor plus = point.detach();
    Tensor minus = point.detach();
    plus.mutable_data()[i] += eps;
    minus.mutable_data()[i] -= eps;
    const Probe hi = evaluate(f, plus);
    const Probe lo = evaluate(f, minus);
    if (hi.fingerprint != base_print || lo.fingerprint != base_print) {
      ++result.skipped_at_kink;
      continue;
    }
    const double numeric = (hi.value - lo.value) / (2.0 * eps);
    const double a = analytic[i];
    // Roundoff in the difference quotient is about u * |f| / eps; components
    // whose gradient sits near that level are judged against it.
    const double roundoff = std::numeric_limits<double>::epsilon() *
                            std::max(std::abs(hi.value), std::abs(lo.value)) / eps;
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8, kRoundoffScale * roundoff});
    const double rel = std::abs(a - numeric) / denom;
    ++result.checked;
    if (result.checked == 1 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = i;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace mrcp
