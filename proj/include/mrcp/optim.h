// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrcp/rng.h"
#include "mrcp/tensor.h"

namespace mrcp {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named trainable tensors plus their Adam moments. Iteration order is the
// lexicographic order of names.
class ParamStore {
 public:
  struct Entry {
    Tensor value;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::int64_t step = 0;
  };

  Tensor& add(const std::string& name, Tensor value);
  // Uniform in +-sqrt(1 / fan_in).
  Tensor& add_uniform(const std::string& name, Shape shape, int fan_in, Rng& rng);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  // Swaps in a different tensor under an existing name (same shape).
  void replace(const std::string& name, Tensor value);

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;

  void zero_grad();

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

// One bias-corrected Adam update of every parameter; clears the gradients.
void adam_step(ParamStore& params, const AdamConfig& cfg);

}  // namespace mrcp
