// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/noise.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mrcp/errors.h"

namespace mrcp {
namespace {

constexpr NoiseKind kAllKinds[] = {NoiseKind::kGaussian,     NoiseKind::kShot,       NoiseKind::kImpulse,
                                   NoiseKind::kGaussianBlur, NoiseKind::kMotionBlur, NoiseKind::kSevere};

void check_image(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("corrupt: expected a 3 x H x W image, got " + shape_string(image.shape()));
  }
}

Tensor clamped(Shape shape, std::vector<double> data) {
  for (double& v : data) v = std::clamp(v, 0.0, 1.0);
  return Tensor(std::move(shape), std::move(data));
}

std::vector<double> blur_taps(int kernel) {
  const int radius = kernel / 2;
  const double sigma = 0.3 * ((kernel - 1) * 0.5 - 1.0) + 0.8;
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : taps) v /= total;
  return taps;
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw ConfigError("noise " + key + ": '" + value + "' is not an integer");
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw ConfigError("noise " + key + ": '" + value + "' is not a number");
  return v;
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kShot: return "shot";
    case NoiseKind::kImpulse: return "impulse";
    case NoiseKind::kGaussianBlur: return "gaussian_blur";
    case NoiseKind::kMotionBlur: return "motion_blur";
    case NoiseKind::kSevere: return "severe";
  }
  return "?";
}

NoiseKind parse_noise_kind(const std::string& name) {
  for (NoiseKind k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown noise kind '" + name +
                    "' (expected gaussian, shot, impulse, gaussian_blur, motion_blur, severe)");
}

void NoiseSpec::validate() const {
  if (kinds.empty()) throw ConfigError("noise: no corruption kinds enabled");
  if (!(gaussian_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (!(shot_scale > 0.0)) throw ConfigError("noise shot scale must be positive");
  if (!(impulse_probability >= 0.0 && impulse_probability <= 1.0)) throw ConfigError("impulse probability must be in [0, 1]");
  if (blur_kernel < 1) throw ConfigError("blur kernel must be at least 1");
  if (motion_length < 1) throw ConfigError("motion blur length must be at least 1");
  if (severe_min_kernel < 1 || severe_max_kernel < severe_min_kernel) throw ConfigError("severe kernel range is empty");
  if (!(severe_sigma >= 0.0)) throw ConfigError("severe sigma must be non-negative");
  if (n_corrupt < 0) throw ConfigError("noisy camera count must be non-negative");
}

std::string NoiseSpec::describe() const {
  std::ostringstream out;
  out << "kinds=";
  for (std::size_t i = 0; i < kinds.size(); ++i) out << (i ? "," : "") << to_string(kinds[i]);
  out << ";sigma=" << shortest(gaussian_sigma) << ";shot_scale=" << shortest(shot_scale)
      << ";impulse_p=" << shortest(impulse_probability)
      << ";blur_kernel=" << blur_kernel << ";motion_length=" << motion_length
      << ";severe_kernel=" << severe_min_kernel << "-" << severe_max_kernel << ";severe_sigma=" << shortest(severe_sigma)
      << ";n_corrupt=" << n_corrupt << ";selection=" << (selection == CameraSelection::kFirst ? "first" : "random");
  return out.str();
}

NoiseSpec NoiseSpec::parse(const std::string& text) {
  NoiseSpec spec;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("noise: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "kinds") {
      spec.kinds.clear();
      std::istringstream list(value);
      std::string name;
      while (std::getline(list, name, ',')) spec.kinds.push_back(parse_noise_kind(name));
    } else if (key == "sigma") {
      spec.gaussian_sigma = parse_double(key, value);
    } else if (key == "shot_scale") {
      spec.shot_scale = parse_double(key, value);
    } else if (key == "impulse_p") {
      spec.impulse_probability = parse_double(key, value);
    } else if (key == "blur_kernel") {
      spec.blur_kernel = parse_int(key, value);
    } else if (key == "motion_length") {
      spec.motion_length = parse_int(key, value);
    } else if (key == "severe_kernel") {
      const auto dash = value.find('-');
      if (dash == std::string::npos) throw ConfigError("noise severe_kernel: expected lo-hi");
      spec.severe_min_kernel = parse_int(key, value.substr(0, dash));
      spec.severe_max_kernel = parse_int(key, value.substr(dash + 1));
    } else if (key == "severe_sigma") {
      spec.severe_sigma = parse_double(key, value);
    } else if (key == "n_corrupt") {
      spec.n_corrupt = parse_int(key, value);
    } else if (key == "selection") {
      if (value == "first") {
        spec.selection = CameraSelection::kFirst;
      } else if (value == "random") {
        spec.selection = CameraSelection::kRandom;
      } else {
        throw ConfigError("noise selection must be first or random, got '" + value + "'");
      }
    } else {
      throw ConfigError("noise: unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

Tensor gaussian_blur(const Tensor& image, int kernel) {
  check_image(image);
  if (kernel < 1) throw ConfigError("gaussian_blur: kernel must be at least 1");
  if (kernel == 1) return image.detach();
  const int h = image.dim(1);
  const int w = image.dim(2);
  const auto taps = blur_taps(kernel);
  const int radius = static_cast<int>(taps.size() / 2);
  const auto src = image.data();
  std::vector<double> tmp(src.size(), 0.0);
  std::vector<double> out(src.size(), 0.0);
  for (int c = 0; c < 3; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int xx = std::clamp(x + k, 0, w - 1);
          acc += taps[static_cast<std::size_t>(k + radius)] * src[base + static_cast<std::size_t>(y) * w + xx];
        }
        tmp[base + static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int yy = std::clamp(y + k, 0, h - 1);
          acc += taps[static_cast<std::size_t>(k + radius)] * tmp[base + static_cast<std::size_t>(yy) * w + x];
        }
        out[base + static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
  }
  return clamped(image.shape(), std::move(out));
}

Tensor motion_blur(const Tensor& image, int length, double angle) {
  check_image(image);
  if (length < 1) throw ConfigError("motion_blur: length must be at least 1");
  const int h = image.dim(1);
  const int w = image.dim(2);
  std::vector<std::pair<int, int>> offsets;
  for (int i = 0; i < length; ++i) {
    const double t = i - 0.5 * (length - 1);
    offsets.emplace_back(static_cast<int>(std::lround(t * std::cos(angle))),
                         static_cast<int>(std::lround(t * std::sin(angle))));
  }
  const auto src = image.data();
  std::vector<double> out(src.size(), 0.0);
  for (int c = 0; c < 3; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (const auto& [dx, dy] : offsets) {
          acc += src[base + static_cast<std::size_t>(std::clamp(y + dy, 0, h - 1)) * w + std::clamp(x + dx, 0, w - 1)];
        }
        out[base + static_cast<std::size_t>(y) * w + x] = acc / length;
      }
    }
  }
  return clamped(image.shape(), std::move(out));
}

Tensor corrupt(const Tensor& image, NoiseKind kind, const NoiseSpec& spec, Rng& rng) {
  check_image(image);
  spec.validate();
  std::vector<double> px(image.data().begin(), image.data().end());
  switch (kind) {
    case NoiseKind::kGaussian:
      if (spec.gaussian_sigma == 0.0) return image.detach();
      for (double& v : px) v += spec.gaussian_sigma * rng.normal();
      break;
    case NoiseKind::kShot:
      for (double& v : px) v = rng.poisson(std::max(0.0, v) * spec.shot_scale) / spec.shot_scale;
      break;
    case NoiseKind::kImpulse:
      for (double& v : px) {
        if (rng.uniform() < spec.impulse_probability) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
      }
      break;
    case NoiseKind::kGaussianBlur:
      return gaussian_blur(image, spec.blur_kernel);
    case NoiseKind::kMotionBlur:
      return motion_blur(image, spec.motion_length, rng.uniform(0.0, std::numbers::pi));
    case NoiseKind::kSevere: {
      const Tensor blurred = gaussian_blur(image, rng.uniform_int(spec.severe_min_kernel, spec.severe_max_kernel));
      px.assign(blurred.data().begin(), blurred.data().end());
      for (double& v : px) v += spec.severe_sigma * rng.normal();
      break;
    }
  }
  return clamped(image.shape(), std::move(px));
}

std::vector<int> corrupt_cameras(std::vector<Tensor>& images, const NoiseSpec& spec, Rng& rng) {
  spec.validate();
  const int n = static_cast<int>(images.size());
  if (spec.n_corrupt > n) {
    throw ConfigError("cannot corrupt " + std::to_string(spec.n_corrupt) + " of " + std::to_string(n) + " cameras");
  }
  if (spec.n_corrupt == 0) return {};
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  if (spec.selection == CameraSelection::kRandom) rng.shuffle(std::span<int>(order));
  order.resize(static_cast<std::size_t>(spec.n_corrupt));
  std::sort(order.begin(), order.end());
  const NoiseKind kind = spec.kinds[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(spec.kinds.size()) - 1))];
  for (int i : order) images[static_cast<std::size_t>(i)] = corrupt(images[static_cast<std::size_t>(i)], kind, spec, rng);
  return order;
}

}  // namespace mrcp
