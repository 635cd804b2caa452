// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Straightforward reference implementations used only by the tests. They
// favour obviousness over speed and share no code with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <set>
#include <vector>

namespace oracle {

// Plain nested-loop arrays, row-major.
struct Array3 {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;
  Array3() = default;
  Array3(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}
  double& at(int k, int y, int x) { return v[(static_cast<std::size_t>(k) * h + y) * w + x]; }
  double at(int k, int y, int x) const { return v[(static_cast<std::size_t>(k) * h + y) * w + x]; }
};

struct Kernel4 {
  int o = 0, i = 0, k = 0;
  std::vector<double> v;
  Kernel4(int o_, int i_, int k_) : o(o_), i(i_), k(k_), v(static_cast<std::size_t>(o_) * i_ * k_ * k_, 0.0) {}
  double at(int a, int b, int y, int x) const { return v[((static_cast<std::size_t>(a) * i + b) * k + y) * k + x]; }
};

// out[o][y][x] = b[o] + sum in[c][y*s+ky-p][x*s+kx-p] * K[o][c][ky][kx]
inline Array3 conv2d(const Array3& in, const Kernel4& K, const std::vector<double>& b, int s, int p) {
  const int oh = (in.h + 2 * p - K.k) / s + 1;
  const int ow = (in.w + 2 * p - K.k) / s + 1;
  Array3 out(K.o, oh, ow);
  for (int o = 0; o < K.o; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = b[static_cast<std::size_t>(o)];
        for (int c = 0; c < in.c; ++c)
          for (int ky = 0; ky < K.k; ++ky)
            for (int kx = 0; kx < K.k; ++kx) {
              const int iy = y * s + ky - p;
              const int ix = x * s + kx - p;
              if (iy < 0 || ix < 0 || iy >= in.h || ix >= in.w) continue;
              acc += in.at(c, iy, ix) * K.at(o, c, ky, kx);
            }
        out.at(o, y, x) = acc;
      }
  return out;
}

// Scatter form of the transposed convolution; K is [Cin x Cout x k x k].
inline Array3 conv_transpose2d(const Array3& in, const Kernel4& K, const std::vector<double>& b, int s, int p) {
  const int oh = (in.h - 1) * s - 2 * p + K.k;
  const int ow = (in.w - 1) * s - 2 * p + K.k;
  Array3 out(K.i, oh, ow);
  for (int o = 0; o < K.i; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) out.at(o, y, x) = b[static_cast<std::size_t>(o)];
  for (int c = 0; c < in.c; ++c)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x)
        for (int o = 0; o < K.i; ++o)
          for (int ky = 0; ky < K.k; ++ky)
            for (int kx = 0; kx < K.k; ++kx) {
              const int oy = y * s + ky - p;
              const int ox = x * s + kx - p;
              if (oy < 0 || ox < 0 || oy >= oh || ox >= ow) continue;
              out.at(o, oy, ox) += in.at(c, y, x) * K.at(c, o, ky, kx);
            }
  return out;
}

struct DepthErrors {
  double abs_rel, sq_rel, rmse;
};

inline DepthErrors depth_errors(const std::vector<double>& pred, const std::vector<double>& target) {
  double a = 0, s = 0, r = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    a += std::fabs(d) / target[i];
    s += d * d / target[i];
    r += d * d;
  }
  const double n = static_cast<double>(pred.size());
  return {a / n, s / n, std::sqrt(r / n)};
}

// Intersection over union computed from label sets, class by class.
inline double mean_iou(const std::vector<int>& pred, const std::vector<int>& target) {
  std::set<int> classes(pred.begin(), pred.end());
  classes.insert(target.begin(), target.end());
  double total = 0;
  for (int c : classes) {
    int inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == c;
      const bool t = target[i] == c;
      inter += p && t;
      uni += p || t;
    }
    total += static_cast<double>(inter) / uni;
  }
  return total / static_cast<double>(classes.size());
}

// Edge-aware smoothness written out pixel by pixel.
inline double edge_smoothness(const std::vector<double>& depth, const Array3& image) {
  const int h = image.h, w = image.w;
  double sx = 0, sy = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      double g = 0;
      for (int c = 0; c < image.c; ++c) g += std::fabs(image.at(c, y, x + 1) - image.at(c, y, x));
      g /= image.c;
      sx += std::fabs(depth[static_cast<std::size_t>(y) * w + x + 1] - depth[static_cast<std::size_t>(y) * w + x]) *
            std::exp(-g);
    }
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x < w; ++x) {
      double g = 0;
      for (int c = 0; c < image.c; ++c) g += std::fabs(image.at(c, y + 1, x) - image.at(c, y, x));
      g /= image.c;
      sy += std::fabs(depth[static_cast<std::size_t>(y + 1) * w + x] - depth[static_cast<std::size_t>(y) * w + x]) *
            std::exp(-g);
    }
  return sx / (h * (w - 1)) + sy / ((h - 1) * w);
}

inline double smooth_l1_pixel(double d, double beta) {
  const double a = std::fabs(d);
  return a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

}  // namespace oracle
