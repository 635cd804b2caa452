// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "mrcp/errors.h"

namespace mrcp {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

using NodePtr = std::shared_ptr<TensorNode>;

Tape* recording(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = Tape::active();
  if (tape == nullptr) return nullptr;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return tape;
  }
  return nullptr;
}

void accumulate(const NodePtr& node, std::span<const double> g) {
  if (!node->requires_grad) return;
  auto& dst = node->ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

#ifndef NDEBUG
void check_finite(const char* op, const Tensor& out, std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs) {
    for (double v : t->data()) {
      if (!std::isfinite(v)) return;
    }
  }
  for (double v : out.data()) {
    if (!std::isfinite(v)) throw EvaluationError(std::string(op) + " produced a non-finite value");
  }
}
#define MRCP_CHECK_FINITE(op, out, ...) check_finite(op, out, {__VA_ARGS__})
#else
#define MRCP_CHECK_FINITE(op, out, ...) ((void)0)
#endif

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_rank(const char* op, const char* what, const Tensor& t, int rank) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got " + shape_string(t.shape()));
  }
}

// cols[(c*k + ky)*k + kx][oy*ow + ox] = in[c][oy*s - p + ky][ox*s - p + kx]
void im2col(const double* in, int channels, int h, int w, int k, int stride, int pad, int oh,
            int ow, double* cols) {
  const int plane = oh * ow;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + static_cast<std::ptrdiff_t>((c * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* dst = row + oy * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, 0.0);
            continue;
          }
          const double* src = in + (static_cast<std::ptrdiff_t>(c) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

// Scatter-add adjoint of im2col.
void col2im(const double* cols, int channels, int h, int w, int k, int stride, int pad, int oh,
            int ow, double* out) {
  const int plane = oh * ow;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + static_cast<std::ptrdiff_t>((c * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          const double* src = row + oy * ow;
          double* dst = out + (static_cast<std::ptrdiff_t>(c) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

Tensor unary(const char* op, const Tensor& a, Buffer values,
             Buffer local_grad) {
  Tensor out(a.shape(), std::move(values));
  if (Tape* tape = recording({&a})) {
    NodePtr an = a.node(), on = out.node();
    tape->record(op, {an}, on, [an, on, dy = std::move(local_grad)] {
      if (!an->requires_grad) return;
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i] * dy[i];
    });
  }
  return out;
}

// Ascending-order compensated mean; exact when all values are equal.
double ordered_mean(std::span<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      c += (s - t) + v;
    } else {
      c += (v - t) + s;
    }
    s = t;
  }
  const double n = static_cast<double>(values.size());
  const double q = s / n;
  const double rem = std::fma(-q, n, s);
  return q + (rem + c) / n;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Buffer v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  Tensor out(a.shape(), std::move(v));
  if (Tape* tape = recording({&a, &b})) {
    NodePtr an = a.node(), bn = b.node(), on = out.node();
    tape->record("add", {an, bn}, on, [an, bn, on] {
      accumulate(an, on->grad);
      accumulate(bn, on->grad);
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Buffer v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  Tensor out(a.shape(), std::move(v));
  if (Tape* tape = recording({&a, &b})) {
    NodePtr an = a.node(), bn = b.node(), on = out.node();
    tape->record("sub", {an, bn}, on, [an, bn, on] {
      accumulate(an, on->grad);
      if (bn->requires_grad) {
        auto& g = bn->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= on->grad[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Buffer v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  Tensor out(a.shape(), std::move(v));
  if (Tape* tape = recording({&a, &b})) {
    NodePtr an = a.node(), bn = b.node(), on = out.node();
    tape->record("mul", {an, bn}, on, [an, bn, on] {
      if (an->requires_grad) {
        auto& g = an->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i] * bn->data[i];
      }
      if (bn->requires_grad) {
        auto& g = bn->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i] * an->data[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Buffer v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * factor;
  return unary("scale", a, std::move(v), Buffer(a.numel(), factor));
}

Tensor add_scalar(const Tensor& a, double offset) {
  Buffer v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + offset;
  return unary("add_scalar", a, std::move(v), Buffer(a.numel(), 1.0));
}

Tensor scale_by(const Tensor& s, const Tensor& t) {
  if (!s.is_scalar()) throw DimensionError("scale_by: factor must be scalar, got " + shape_string(s.shape()));
  const double f = s[0];
  Buffer v(t.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f * t[i];
  Tensor out(t.shape(), std::move(v));
  if (Tape* tape = recording({&s, &t})) {
    NodePtr sn = s.node(), tn = t.node(), on = out.node();
    tape->record("scale_by", {sn, tn}, on, [sn, tn, on] {
      if (sn->requires_grad) {
        double acc = 0.0;
        for (std::size_t i = 0; i < tn->data.size(); ++i) acc += on->grad[i] * tn->data[i];
        sn->ensure_grad()[0] += acc;
      }
      if (tn->requires_grad) {
        auto& g = tn->ensure_grad();
        const double f = sn->data[0];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += f * on->grad[i];
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  Tensor out = Tensor::scalar(acc);
  if (Tape* tape = recording({&a})) {
    NodePtr an = a.node(), on = out.node();
    tape->record("sum", {an}, on, [an, on] {
      if (!an->requires_grad) return;
      auto& g = an->ensure_grad();
      for (double& x : g) x += on->grad[0];
    });
  }
  return out;
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                         shape_string(shape));
  }
  Tensor out(std::move(shape), Buffer(a.data().begin(), a.data().end()));
  if (Tape* tape = recording({&a})) {
    NodePtr an = a.node(), on = out.node();
    tape->record("reshape", {an}, on, [an, on] { accumulate(an, on->grad); });
  }
  return out;
}

Tensor flatten(const Tensor& a) { return reshape(a, {static_cast<int>(a.numel())}); }

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractViolation("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (first.empty()) throw DimensionError("concat: scalars have no axis 0");
  Shape out_shape = first;
  out_shape[0] = 0;
  Buffer v;
  for (const Tensor& p : parts) {
    if (p.rank() != static_cast<int>(first.size()) ||
        !std::equal(first.begin() + 1, first.end(), p.shape().begin() + 1)) {
      throw DimensionError("concat: trailing dims differ between " + shape_string(first) +
                           " and " + shape_string(p.shape()));
    }
    out_shape[0] += p.shape()[0];
    v.insert(v.end(), p.data().begin(), p.data().end());
  }
  Tensor out(std::move(out_shape), std::move(v));
  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  Tape* tape = Tape::active();
  if (tape != nullptr && any) {
    std::vector<NodePtr> ins;
    for (const Tensor& p : parts) ins.push_back(p.node());
    NodePtr on = out.node();
    tape->record("concat", ins, on, [ins, on] {
      std::size_t offset = 0;
      for (const auto& in : ins) {
        const std::size_t n = in->data.size();
        accumulate(in, std::span<const double>(on->grad).subspan(offset, n));
        offset += n;
      }
    });
  }
  return out;
}

Tensor slice(const Tensor& a, int begin, int end) {
  if (a.rank() == 0 || begin < 0 || end > a.dim(0) || begin >= end) {
    throw DimensionError("slice: rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for " + shape_string(a.shape()));
  }
  const std::size_t row = a.numel() / static_cast<std::size_t>(a.dim(0));
  Shape shape = a.shape();
  shape[0] = end - begin;
  auto first = a.data().begin() + static_cast<std::ptrdiff_t>(row * begin);
  Tensor out(std::move(shape), Buffer(first, first + static_cast<std::ptrdiff_t>(row * (end - begin))));
  if (Tape* tape = recording({&a})) {
    NodePtr an = a.node(), on = out.node();
    const std::size_t offset = row * static_cast<std::size_t>(begin);
    tape->record("slice", {an}, on, [an, on, offset] {
      if (!an->requires_grad) return;
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < on->grad.size(); ++i) g[offset + i] += on->grad[i];
    });
  }
  return out;
}

Tensor select(const Tensor& a, std::size_t index) {
  if (index >= a.numel()) {
    throw DimensionError("select: index " + std::to_string(index) + " out of range for " +
                         shape_string(a.shape()));
  }
  Tensor out = Tensor::scalar(a[index]);
  if (Tape* tape = recording({&a})) {
    NodePtr an = a.node(), on = out.node();
    tape->record("select", {an}, on, [an, on, index] {
      if (an->requires_grad) an->ensure_grad()[index] += on->grad[0];
    });
  }
  return out;
}

Tensor mean_of(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractViolation("mean_of: no inputs");
  for (const Tensor& p : parts) require_same_shape("mean_of", parts[0], p);
  const std::size_t n = parts.size();
  Buffer v(parts[0].numel());
  Buffer scratch(n);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) scratch[j] = parts[j][i];
    v[i] = ordered_mean(scratch);
  }
  Tensor out(parts[0].shape(), std::move(v));
  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  Tape* tape = Tape::active();
  if (tape != nullptr && any) {
    std::vector<NodePtr> ins;
    for (const Tensor& p : parts) ins.push_back(p.node());
    NodePtr on = out.node();
    tape->record("mean_of", ins, on, [ins, on] {
      const double w = 1.0 / static_cast<double>(ins.size());
      for (const auto& in : ins) {
        if (!in->requires_grad) continue;
        auto& g = in->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += w * on->grad[i];
      }
    });
  }
  return out;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_rank("linear", "input", input, 1);
  require_rank("linear", "weight", weight, 2);
  require_rank("linear", "bias", bias, 1);
  const int m = weight.dim(0), n = weight.dim(1);
  if (input.dim(0) != n || bias.dim(0) != m) {
    throw DimensionError("linear: weight " + shape_string(weight.shape()) + " incompatible with input " +
                         shape_string(input.shape()) + " and bias " + shape_string(bias.shape()));
  }
  Buffer y(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    double acc = bias[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) acc += weight[static_cast<std::size_t>(r * n + c)] * input[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  Tensor out({m}, std::move(y));
  if (Tape* tape = recording({&input, &weight, &bias})) {
    NodePtr xn = input.node(), wn = weight.node(), bn = bias.node(), on = out.node();
    tape->record("linear", {xn, wn, bn}, on, [xn, wn, bn, on, m, n] {
      const auto& dy = on->grad;
      if (xn->requires_grad) {
        auto& g = xn->ensure_grad();
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < n; ++c) g[static_cast<std::size_t>(c)] += wn->data[static_cast<std::size_t>(r * n + c)] * dy[static_cast<std::size_t>(r)];
      }
      if (wn->requires_grad) {
        auto& g = wn->ensure_grad();
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < n; ++c) g[static_cast<std::size_t>(r * n + c)] += dy[static_cast<std::size_t>(r)] * xn->data[static_cast<std::size_t>(c)];
      }
      accumulate(bn, dy);
    });
  }
  MRCP_CHECK_FINITE("linear", out, &input, &weight, &bias);
  return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding) {
  require_rank("conv2d", "input", input, 3);
  require_rank("conv2d", "kernel", kernel, 4);
  require_rank("conv2d", "bias", bias, 1);
  const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int cout = kernel.dim(0), k = kernel.dim(2);
  if (kernel.dim(1) != cin || kernel.dim(3) != k) {
    throw DimensionError("conv2d: input " + shape_string(input.shape()) + " incompatible with kernel " +
                         shape_string(kernel.shape()));
  }
  if (bias.dim(0) != cout) {
    throw DimensionError("conv2d: bias " + shape_string(bias.shape()) + " does not match kernel " +
                         shape_string(kernel.shape()));
  }
  if (stride < 1 || padding < 0 || k > h + 2 * padding || k > w + 2 * padding) {
    throw DimensionError("conv2d: kernel " + shape_string(kernel.shape()) + " does not fit input " +
                         shape_string(input.shape()) + " with padding " + std::to_string(padding));
  }
  const int oh = (h + 2 * padding - k) / stride + 1;
  const int ow = (w + 2 * padding - k) / stride + 1;
  const int rows = cin * k * k;
  const int plane = oh * ow;

  auto cols = std::make_shared<Buffer>(static_cast<std::size_t>(rows) * plane);
  im2col(input.data().data(), cin, h, w, k, stride, padding, oh, ow, cols->data());

  Buffer y(static_cast<std::size_t>(cout) * plane);
  MatMap ym(y.data(), cout, plane);
  ym.noalias() = ConstMatMap(kernel.data().data(), cout, rows) * ConstMatMap(cols->data(), rows, plane);
  for (int c = 0; c < cout; ++c) ym.row(c).array() += bias[static_cast<std::size_t>(c)];

  Tensor out({cout, oh, ow}, std::move(y));
  if (Tape* tape = recording({&input, &kernel, &bias})) {
    NodePtr xn = input.node(), kn = kernel.node(), bn = bias.node(), on = out.node();
    tape->record("conv2d", {xn, kn, bn}, on,
                 [xn, kn, bn, on, cols, cin, h, w, k, stride, padding, oh, ow, cout, rows, plane] {
                   ConstMatMap dy(on->grad.data(), cout, plane);
                   if (kn->requires_grad) {
                     MatMap(kn->ensure_grad().data(), cout, rows).noalias() +=
                         dy * ConstMatMap(cols->data(), rows, plane).transpose();
                   }
                   if (bn->requires_grad) {
                     auto& g = bn->ensure_grad();
                     for (int c = 0; c < cout; ++c) g[static_cast<std::size_t>(c)] += dy.row(c).sum();
                   }
                   if (xn->requires_grad) {
                     RowMat dcols = ConstMatMap(kn->data.data(), cout, rows).transpose() * dy;
                     col2im(dcols.data(), cin, h, w, k, stride, padding, oh, ow,
                            xn->ensure_grad().data());
                   }
                 });
  }
  MRCP_CHECK_FINITE("conv2d", out, &input, &kernel, &bias);
  return out;
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                        int stride, int padding) {
  require_rank("conv_transpose2d", "input", input, 3);
  require_rank("conv_transpose2d", "kernel", kernel, 4);
  require_rank("conv_transpose2d", "bias", bias, 1);
  const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int cout = kernel.dim(1), k = kernel.dim(2);
  if (kernel.dim(0) != cin || kernel.dim(3) != k) {
    throw DimensionError("conv_transpose2d: input " + shape_string(input.shape()) +
                         " incompatible with kernel " + shape_string(kernel.shape()));
  }
  if (bias.dim(0) != cout) {
    throw DimensionError("conv_transpose2d: bias " + shape_string(bias.shape()) +
                         " does not match kernel " + shape_string(kernel.shape()));
  }
  if (stride < 1 || padding < 0) throw DimensionError("conv_transpose2d: invalid stride or padding");
  const int oh = (h - 1) * stride - 2 * padding + k;
  const int ow = (w - 1) * stride - 2 * padding + k;
  if (oh < 1 || ow < 1) {
    throw DimensionError("conv_transpose2d: output size " + std::to_string(oh) + "x" +
                         std::to_string(ow) + " is invalid for input " + shape_string(input.shape()));
  }
  const int rows = cout * k * k;
  const int plane = h * w;

  RowMat cols = ConstMatMap(kernel.data().data(), cin, rows).transpose() *
                ConstMatMap(input.data().data(), cin, plane);
  Buffer y(static_cast<std::size_t>(cout) * oh * ow, 0.0);
  col2im(cols.data(), cout, oh, ow, k, stride, padding, h, w, y.data());
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < cout; ++c) {
    const double b = bias[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < out_plane; ++i) y[c * out_plane + i] += b;
  }

  Tensor out({cout, oh, ow}, std::move(y));
  if (Tape* tape = recording({&input, &kernel, &bias})) {
    NodePtr xn = input.node(), kn = kernel.node(), bn = bias.node(), on = out.node();
    tape->record("conv_transpose2d", {xn, kn, bn}, on,
                 [xn, kn, bn, on, cin, h, w, k, stride, padding, oh, ow, cout, rows, plane] {
                   RowMat gcols(rows, plane);
                   im2col(on->grad.data(), cout, oh, ow, k, stride, padding, h, w, gcols.data());
                   if (xn->requires_grad) {
                     MatMap(xn->ensure_grad().data(), cin, plane).noalias() +=
                         ConstMatMap(kn->data.data(), cin, rows) * gcols;
                   }
                   if (kn->requires_grad) {
                     MatMap(kn->ensure_grad().data(), cin, rows).noalias() +=
                         ConstMatMap(xn->data.data(), cin, plane) * gcols.transpose();
                   }
                   if (bn->requires_grad) {
                     auto& g = bn->ensure_grad();
                     const std::size_t op = static_cast<std::size_t>(oh) * ow;
                     for (int c = 0; c < cout; ++c) {
                       double acc = 0.0;
                       for (std::size_t i = 0; i < op; ++i) acc += on->grad[c * op + i];
                       g[static_cast<std::size_t>(c)] += acc;
                     }
                   }
                 });
  }
  MRCP_CHECK_FINITE("conv_transpose2d", out, &input, &kernel, &bias);
  return out;
}

Tensor activation(const Tensor& input, Activation act) {
  const std::size_t n = input.numel();
  Buffer y(n), dy(n);
  KinkMonitor* monitor = KinkMonitor::current();
  switch (act.kind) {
    case ActivationKind::kRelu:
      for (std::size_t i = 0; i < n; ++i) {
        const bool on = input[i] > 0.0;
        y[i] = on ? input[i] : 0.0;
        dy[i] = on ? 1.0 : 0.0;
        if (monitor) monitor->mix(on);
      }
      return unary("relu", input, std::move(y), std::move(dy));
    case ActivationKind::kLeakyRelu:
      for (std::size_t i = 0; i < n; ++i) {
        const bool on = input[i] > 0.0;
        y[i] = on ? input[i] : act.slope * input[i];
        dy[i] = on ? 1.0 : act.slope;
        if (monitor) monitor->mix(on);
      }
      return unary("leaky_relu", input, std::move(y), std::move(dy));
    case ActivationKind::kExp:
      for (std::size_t i = 0; i < n; ++i) y[i] = dy[i] = std::exp(input[i]);
      return unary("exp", input, std::move(y), std::move(dy));
    case ActivationKind::kAbs:
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::abs(input[i]);
        dy[i] = input[i] > 0.0 ? 1.0 : (input[i] < 0.0 ? -1.0 : 0.0);
        if (monitor) monitor->mix(input[i] >= 0.0);
      }
      return unary("abs", input, std::move(y), std::move(dy));
  }
  throw ContractViolation("activation: unknown kind");
}

Tensor softplus(const Tensor& input) {
  const std::size_t n = input.numel();
  Buffer y(n), dy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = input[i];
    y[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    dy[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return unary("softplus", input, std::move(y), std::move(dy));
}

Tensor softmax(const Tensor& scores) {
  require_rank("softmax", "scores", scores, 1);
  const std::size_t n = scores.numel();
  const double peak = *std::max_element(scores.data().begin(), scores.data().end());
  Buffer e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(scores[i] - peak);
  Buffer sorted = e;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;
  for (double& v : e) v /= total;
  Tensor out(scores.shape(), std::move(e));
  if (Tape* tape = recording({&scores})) {
    NodePtr sn = scores.node(), on = out.node();
    tape->record("softmax", {sn}, on, [sn, on] {
      if (!sn->requires_grad) return;
      const auto& y = on->data;
      const auto& dy = on->grad;
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
      auto& g = sn->ensure_grad();
      for (std::size_t i = 0; i < y.size(); ++i) g[i] += y[i] * (dy[i] - dot);
    });
  }
  return out;
}

std::vector<Tensor> softmax_normalize(std::span<const Tensor> scores) {
  if (scores.empty()) throw ContractViolation("softmax_normalize: empty score list");
  std::vector<Tensor> column;
  column.reserve(scores.size());
  for (const Tensor& s : scores) {
    if (!s.is_scalar()) throw DimensionError("softmax_normalize: score " + shape_string(s.shape()) + " is not scalar");
    column.push_back(reshape(s, {1}));
  }
  const Tensor weights = softmax(concat(column));
  std::vector<Tensor> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back(select(weights, i));
  return out;
}

Tensor channel_affine(const Tensor& h, const Tensor& a, const Tensor& b) {
  require_rank("channel_affine", "feature", h, 3);
  const int c = h.dim(0);
  if (a.numel() != static_cast<std::size_t>(c) || b.numel() != static_cast<std::size_t>(c)) {
    throw DimensionError("channel_affine: feature " + shape_string(h.shape()) + " vs scale " +
                         shape_string(a.shape()) + " and shift " + shape_string(b.shape()));
  }
  const std::size_t plane = h.numel() / static_cast<std::size_t>(c);
  Buffer y(h.numel());
  for (int k = 0; k < c; ++k) {
    const double ak = a[static_cast<std::size_t>(k)], bk = b[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < plane; ++i) y[k * plane + i] = ak * h[k * plane + i] + bk;
  }
  Tensor out(h.shape(), std::move(y));
  if (Tape* tape = recording({&h, &a, &b})) {
    NodePtr hn = h.node(), an = a.node(), bn = b.node(), on = out.node();
    tape->record("channel_affine", {hn, an, bn}, on, [hn, an, bn, on, c, plane] {
      const auto& dy = on->grad;
      for (int k = 0; k < c; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * plane;
        if (hn->requires_grad) {
          auto& g = hn->ensure_grad();
          const double ak = an->data[static_cast<std::size_t>(k)];
          for (std::size_t i = 0; i < plane; ++i) g[base + i] += ak * dy[base + i];
        }
        if (an->requires_grad) {
          double acc = 0.0;
          for (std::size_t i = 0; i < plane; ++i) acc += dy[base + i] * hn->data[base + i];
          an->ensure_grad()[static_cast<std::size_t>(k)] += acc;
        }
        if (bn->requires_grad) {
          double acc = 0.0;
          for (std::size_t i = 0; i < plane; ++i) acc += dy[base + i];
          bn->ensure_grad()[static_cast<std::size_t>(k)] += acc;
        }
      }
    });
  }
  return out;
}

namespace {

// Forward difference along `axis` (counted from the end: 1 == x, 2 == y).
Tensor axis_diff(const char* op, const Tensor& a, int from_end) {
  if (a.rank() < 2) throw DimensionError(std::string(op) + ": need rank >= 2, got " + shape_string(a.shape()));
  const int axis = a.rank() - from_end;
  const int len = a.dim(axis);
  if (len < 2) throw DimensionError(std::string(op) + ": axis too short in " + shape_string(a.shape()));
  std::size_t inner = 1;
  for (int d = axis + 1; d < a.rank(); ++d) inner *= static_cast<std::size_t>(a.dim(d));
  const std::size_t outer = a.numel() / (inner * static_cast<std::size_t>(len));
  Shape shape = a.shape();
  shape[static_cast<std::size_t>(axis)] = len - 1;
  Buffer y(outer * (len - 1) * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (int j = 0; j + 1 < len; ++j)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t src = (o * len + j) * inner + i;
        y[(o * (len - 1) + j) * inner + i] = a[src + inner] - a[src];
      }
  Tensor out(std::move(shape), std::move(y));
  if (Tape* tape = recording({&a})) {
    NodePtr an = a.node(), on = out.node();
    tape->record(op, {an}, on, [an, on, outer, len, inner] {
      if (!an->requires_grad) return;
      auto& g = an->ensure_grad();
      for (std::size_t o = 0; o < outer; ++o)
        for (int j = 0; j + 1 < len; ++j)
          for (std::size_t i = 0; i < inner; ++i) {
            const double d = on->grad[(o * (len - 1) + j) * inner + i];
            const std::size_t src = (o * len + j) * inner + i;
            g[src + inner] += d;
            g[src] -= d;
          }
    });
  }
  return out;
}

}  // namespace

Tensor diff_x(const Tensor& a) { return axis_diff("diff_x", a, 1); }
Tensor diff_y(const Tensor& a) { return axis_diff("diff_y", a, 2); }

Tensor huber(const Tensor& residual, double beta) {
  if (!(beta > 0.0)) throw InputError("huber: beta must be positive");
  const std::size_t n = residual.numel();
  Buffer y(n), dy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = residual[i];
    const double ad = std::abs(d);
    if (ad < beta) {
      y[i] = 0.5 * d * d / beta;
      dy[i] = d / beta;
    } else {
      y[i] = ad - 0.5 * beta;
      dy[i] = d > 0.0 ? 1.0 : -1.0;
    }
  }
  return unary("huber", residual, std::move(y), std::move(dy));
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets) {
  require_rank("cross_entropy", "logits", logits, 3);
  const int classes = logits.dim(0);
  const std::size_t plane = logits.numel() / static_cast<std::size_t>(classes);
  if (targets.size() != plane) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for logits " + shape_string(logits.shape()));
  }
  for (int t : targets) {
    if (t < 0 || t >= classes) {
      throw InputError("cross_entropy: class " + std::to_string(t) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
  auto probs = std::make_shared<Buffer>(logits.numel());
  double total = 0.0;
  for (std::size_t p = 0; p < plane; ++p) {
    double peak = logits[p];
    for (int k = 1; k < classes; ++k) peak = std::max(peak, logits[k * plane + p]);
    double z = 0.0;
    for (int k = 0; k < classes; ++k) z += std::exp(logits[k * plane + p] - peak);
    for (int k = 0; k < classes; ++k) (*probs)[k * plane + p] = std::exp(logits[k * plane + p] - peak) / z;
    total += std::log(z) + peak - logits[static_cast<std::size_t>(targets[p]) * plane + p];
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(plane));
  if (Tape* tape = recording({&logits})) {
    NodePtr ln = logits.node(), on = out.node();
    std::vector<int> labels(targets.begin(), targets.end());
    tape->record("cross_entropy", {ln}, on, [ln, on, probs, labels = std::move(labels), classes, plane] {
      if (!ln->requires_grad) return;
      auto& g = ln->ensure_grad();
      const double w = on->grad[0] / static_cast<double>(plane);
      for (int k = 0; k < classes; ++k)
        for (std::size_t p = 0; p < plane; ++p) {
          const double onehot = labels[p] == k ? 1.0 : 0.0;
          g[k * plane + p] += w * ((*probs)[k * plane + p] - onehot);
        }
    });
  }
  return out;
}

}  // namespace mrcp
