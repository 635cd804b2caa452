// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Image corruptions applied to a subset of the robots' cameras.

#pragma once

#include <string>
#include <vector>

#include "mrcp/rng.h"
#include "mrcp/tensor.h"

namespace mrcp {

enum class NoiseKind { kGaussian, kShot, kImpulse, kGaussianBlur, kMotionBlur, kSevere };

std::string to_string(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& name);

enum class CameraSelection { kFirst, kRandom };

struct NoiseSpec {
  std::vector<NoiseKind> kinds = {NoiseKind::kSevere};
  double gaussian_sigma = 0.05;
  double shot_scale = 50.0;      // photons per unit intensity
  double impulse_probability = 0.02;
  int blur_kernel = 7;
  int motion_length = 9;
  int severe_min_kernel = 1;
  int severe_max_kernel = 100;
  double severe_sigma = 0.1;
  int n_corrupt = 0;
  CameraSelection selection = CameraSelection::kFirst;

  // Throws ConfigError on out-of-range parameters or an empty kind list.
  void validate() const;
  // Compact "key=value;..." form stored in dataset manifests.
  std::string describe() const;
  static NoiseSpec parse(const std::string& text);
};

// Applies one corruption to a 3 x H x W image in [0, 1] and clamps the
// result to [0, 1]. The input is not modified.
Tensor corrupt(const Tensor& image, NoiseKind kind, const NoiseSpec& spec, Rng& rng);

// Corrupts spec.n_corrupt of the images in place with one kind drawn
// uniformly from spec.kinds. Returns the indices that were corrupted.
std::vector<int> corrupt_cameras(std::vector<Tensor>& images, const NoiseSpec& spec, Rng& rng);

// Separable Gaussian blur with `kernel` taps (sigma from the kernel size, as
// in common image libraries) and replicated borders.
Tensor gaussian_blur(const Tensor& image, int kernel);

// Average along a line of `length` pixels at `angle` radians.
Tensor motion_blur(const Tensor& image, int length, double angle);

}  // namespace mrcp
