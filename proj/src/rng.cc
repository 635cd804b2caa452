// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/rng.h"

#include <cmath>
#include <numbers>

namespace mrcp {

int Rng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  // Lemire's multiply-shift with rejection of the biased low band.
  const std::uint64_t threshold = (0 - span) % span;
  for (;;) {
    const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * span;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<int>(lo + static_cast<std::int64_t>(m >> 64));
    }
  }
}

double Rng::normal() {
  // Box-Muller; one output per pair of uniforms keeps the stream stateless.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda > 500.0) {
    const double x = std::round(normal(lambda, std::sqrt(lambda)));
    return x < 0.0 ? 0 : static_cast<int>(x);
  }
  // Knuth's product method.
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

Rng Rng::substream(std::uint64_t key) const {
  return Rng(mix(seed_ + 0x632be59bd9b4e019ULL * (key + 1)));
}

}  // namespace mrcp
