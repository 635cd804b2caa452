// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/optim.h"

#include <cmath>

#include "mrcp/errors.h"

namespace mrcp {

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ContractViolation("duplicate parameter name: " + name);
  value.set_requires_grad(true);
  Entry e;
  e.first_moment.assign(value.numel(), 0.0);
  e.second_moment.assign(value.numel(), 0.0);
  e.value = std::move(value);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Tensor& ParamStore::add_uniform(const std::string& name, Shape shape, int fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return add(name, Tensor(std::move(shape), std::move(v)));
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractViolation("unknown parameter: " + name);
  return it->second.value;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractViolation("unknown parameter: " + name);
  return it->second.value;
}

void ParamStore::replace(const std::string& name, Tensor value) {
  Tensor& slot = get(name);
  if (slot.shape() != value.shape()) {
    throw DimensionError("replace " + name + ": shape " + shape_string(value.shape()) +
                         " differs from " + shape_string(slot.shape()));
  }
  slot = std::move(value);
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, e] : entries_) e.value.zero_grad();
}

void adam_step(ParamStore& params, const AdamConfig& cfg) {
  for (auto& [name, e] : params.entries()) {
    if (!e.value.has_grad()) throw ContractViolation("adam_step: parameter '" + name + "' has no gradient");
  }
  for (auto& [name, e] : params.entries()) {
    ++e.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(e.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(e.step));
    auto w = e.value.mutable_data();
    auto g = e.value.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      e.first_moment[i] = cfg.beta1 * e.first_moment[i] + (1.0 - cfg.beta1) * g[i];
      e.second_moment[i] = cfg.beta2 * e.second_moment[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = e.first_moment[i] / c1;
      const double v_hat = e.second_moment[i] / c2;
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    e.value.clear_grad();
  }
}

}  // namespace mrcp
