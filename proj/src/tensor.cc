// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/tensor.h"

#include <numeric>
#include <sstream>

#include "mrcp/errors.h"

namespace mrcp {
namespace {

thread_local Tape* g_active_tape = nullptr;
thread_local KinkMonitor* g_kink_monitor = nullptr;

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("non-positive dimension in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Buffer& TensorNode::ensure_grad() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor::Tensor() : node_(std::make_shared<TensorNode>()) {
  node_->data.assign(1, 0.0);
}

Tensor::Tensor(Shape shape, const std::vector<double>& data)
    : Tensor(std::move(shape), Buffer(data.begin(), data.end())) {}

Tensor::Tensor(Shape shape, Buffer data) : node_(std::make_shared<TensorNode>()) {
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("shape " + shape_string(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->data = std::move(data);
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), Buffer(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape()));
  }
  return node_->shape[static_cast<std::size_t>(axis)];
}

double Tensor::item() const {
  if (!is_scalar()) throw ContractViolation("item() on non-scalar tensor " + shape_string(shape()));
  return node_->data[0];
}

Tensor& Tensor::set_requires_grad(bool value) {
  node_->requires_grad = value;
  return *this;
}

void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->data); }

Tensor make_tensor(std::shared_ptr<TensorNode> node) { return Tensor(std::move(node)); }

Tape::~Tape() { clear(); }

void Tape::record(const char* op, std::vector<std::shared_ptr<TensorNode>> inputs,
                  const std::shared_ptr<TensorNode>& output, BackwardFn backward) {
  output->tape = this;
  output->tape_id = records_.size();
  output->requires_grad = true;
  records_.push_back(Record{op, std::move(inputs), output, std::move(backward)});
}

void Tape::clear() {
  for (auto& r : records_) {
    if (r.output->tape == this) r.output->tape = nullptr;
  }
  records_.clear();
}

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

void backward(const Tensor& loss, Tape& tape) {
  if (!loss.is_scalar()) {
    throw ContractViolation("backward() needs a scalar loss, got " + shape_string(loss.shape()));
  }
  const auto& root = loss.node();
  if (root->tape != &tape) throw ContractViolation("backward(): loss is not recorded on this tape");

  root->grad.assign(1, 1.0);
  for (std::size_t i = root->tape_id + 1; i-- > 0;) {
    const auto& rec = tape.at(i);
    if (!rec.output->has_grad()) continue;
    rec.backward();
  }
  tape.clear();
}

KinkMonitor::KinkMonitor() : previous_(g_kink_monitor) { g_kink_monitor = this; }
KinkMonitor::~KinkMonitor() { g_kink_monitor = previous_; }
KinkMonitor* KinkMonitor::current() { return g_kink_monitor; }

}  // namespace mrcp
