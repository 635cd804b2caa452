// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense f64 tensors and the reverse-mode tape that records operations on them.
//
// A Tensor is a cheap handle onto shared storage, so copies alias. Operations
// executed while a TapeScope is active record themselves on that tape when at
// least one operand requires a gradient; backward() then replays the tape in
// reverse. Outside a TapeScope nothing is recorded (inference mode).

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace mrcp {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tape;

// Allocator with a fixed 64-byte alignment. Vectorized kernels peel a
// different number of leading elements depending on the buffer address, which
// changes rounding; a fixed alignment keeps results identical across runs.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

struct TensorNode {
  Shape shape;
  Buffer data;
  Buffer grad;  // empty == absent
  bool requires_grad = false;
  const Tape* tape = nullptr;
  std::size_t tape_id = 0;

  bool has_grad() const { return !grad.empty(); }
  Buffer& ensure_grad();
};

class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, Buffer data);
  Tensor(Shape shape, const std::vector<double>& data);
  Tensor(Shape shape, std::initializer_list<double> data) : Tensor(std::move(shape), Buffer(data)) {}

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);

  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const;
  std::size_t numel() const { return node_->data.size(); }
  bool is_scalar() const { return numel() == 1; }

  std::span<const double> data() const { return node_->data; }
  std::span<double> mutable_data() { return node_->data; }
  double item() const;
  double operator[](std::size_t i) const { return node_->data[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool value);
  bool has_grad() const { return node_->has_grad(); }
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad();
  void clear_grad() { node_->grad.clear(); }

  // Copy of the values with no gradient or tape attachment.
  Tensor detach() const;

  bool on_tape() const { return node_->tape != nullptr; }
  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  friend class Tape;
  friend Tensor make_tensor(std::shared_ptr<TensorNode> node);

  std::shared_ptr<TensorNode> node_;
};

Tensor make_tensor(std::shared_ptr<TensorNode> node);

// Ordered log of recorded operations. Inputs are always recorded before the
// operations that consume them, so reverse order is a valid topological order.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Record {
    const char* op;
    std::vector<std::shared_ptr<TensorNode>> inputs;
    std::shared_ptr<TensorNode> output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape();

  void record(const char* op, std::vector<std::shared_ptr<TensorNode>> inputs,
              const std::shared_ptr<TensorNode>& output, BackwardFn backward);

  std::size_t size() const { return records_.size(); }
  const Record& at(std::size_t i) const { return records_.at(i); }

  // Detaches every recorded output and frees saved forward values.
  void clear();

  // Tape receiving records on this thread, or nullptr.
  static Tape* active();

 private:
  friend class TapeScope;
  std::vector<Record> records_;
};

// Makes `tape` the active tape on this thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Seeds d(loss)/d(loss) = 1 and accumulates gradients into every tensor that
// requires one, visiting each record once. The tape is cleared afterwards.
void backward(const Tensor& loss, Tape& tape);

// Records the on/off pattern of piecewise-linear activations while alive.
// Gradient checks use it to skip perturbations that cross a kink.
class KinkMonitor {
 public:
  KinkMonitor();
  ~KinkMonitor();
  KinkMonitor(const KinkMonitor&) = delete;
  KinkMonitor& operator=(const KinkMonitor&) = delete;

  std::uint64_t fingerprint() const { return hash_; }
  void mix(bool branch) {
    hash_ = (hash_ ^ (branch ? 0x9eULL : 0x3bULL)) * 1099511628211ULL;
  }

  // Monitor active on this thread, or nullptr.
  static KinkMonitor* current();

 private:
  KinkMonitor* previous_;
  std::uint64_t hash_ = 1469598103934665603ULL;
};

}  // namespace mrcp
