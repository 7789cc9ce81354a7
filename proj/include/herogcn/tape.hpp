#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "herogcn/errors.hpp"
#include "herogcn/matrix.hpp"

namespace herogcn {

/// A trainable matrix with its accumulated gradient. Parameters outlive tapes:
/// each forward pass binds them as leaves, and backward() adds into `grad`.
template <std::floating_point T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  Parameter() = default;
  Parameter(std::string n, Matrix<T> v) : name(std::move(n)), value(std::move(v)), grad(Matrix<T>::zeros_like(value)) {}

  void zero_grad() {
    if (!grad.same_shape(value)) grad = Matrix<T>::zeros_like(value);
    grad.fill(T{0});
  }
};

template <std::floating_point T>
class Tape;

/// Handle to a value recorded on a Tape.
template <std::floating_point T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  std::size_t id() const noexcept { return id_; }
  Tape<T>& tape() const noexcept { return *tape_; }
  const Matrix<T>& value() const { return tape_->value(*this); }
  const Matrix<T>& grad() const { return tape_->grad(*this); }
  bool requires_grad() const { return tape_->requires_grad(id_); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  /// Value of a 1x1 result.
  T item() const {
    const auto& v = value();
    if (v.size() != 1) throw ShapeError("item() on non-scalar " + v.shape_string());
    return v[0];
  }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode differentiation tape. Nodes are appended in evaluation order,
/// so the node sequence is always topologically sorted.
template <std::floating_point T>
class Tape {
 public:
  /// Propagates the node's output gradient into its inputs via grad_ref().
  using BackwardFn = std::function<void(Tape&, const Matrix<T>& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Matrix<T> value) { return push(std::move(value), false, {}, nullptr); }

  /// Free leaf that accumulates its own gradient (read back with grad()).
  Var<T> variable(Matrix<T> value) { return push(std::move(value), true, {}, nullptr); }

  /// Leaf bound to a Parameter; backward() adds the gradient into param.grad.
  Var<T> parameter(Parameter<T>& param) {
    auto v = push(param.value, true, {}, nullptr);
    nodes_.back().param = &param;
    return v;
  }

  /// Records an operation. `requires_grad` is inherited from the inputs.
  Var<T> record(Matrix<T> value, std::vector<std::size_t> inputs, BackwardFn fn) {
    if (!value.all_finite()) throw NumericalError("operation produced a non-finite value");
    bool rg = false;
    for (auto id : inputs) rg = rg || nodes_.at(id).requires_grad;
    return push(std::move(value), rg, std::move(inputs), rg ? std::move(fn) : BackwardFn{});
  }

  const Matrix<T>& value(Var<T> v) const { return nodes_.at(v.id()).value; }
  const Matrix<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  const Matrix<T>& grad(Var<T> v) const {
    const auto& n = nodes_.at(v.id());
    if (n.grad.empty() && !n.value.empty()) {
      throw ConfigError("no gradient recorded for node " + std::to_string(v.id()));
    }
    return n.grad;
  }
  bool has_grad(Var<T> v) const { return !nodes_.at(v.id()).grad.empty() || nodes_.at(v.id()).value.empty(); }

  /// Gradient buffer of node `id`, zero-allocated on first use.
  Matrix<T>& grad_ref(std::size_t id) {
    auto& n = nodes_[id];
    if (!n.grad.same_shape(n.value) || n.grad.empty()) n.grad = Matrix<T>::zeros_like(n.value);
    return n.grad;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a 1x1 loss. Gradients accumulate across fan-out.
  /// Call at most once per tape; leaves not reached from the loss get zero gradients.
  void backward(Var<T> loss) {
    if (nodes_.empty()) throw ConfigError("backward on empty tape");
    const auto& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) throw ShapeError("backward requires a 1x1 loss, got " + lv.shape_string());
    if (!nodes_[loss.id()].requires_grad) return;
    grad_ref(loss.id()) = Matrix<T>(1, 1, T{1});
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty()) continue;
      if (n.backward) n.backward(*this, n.grad);
    }
    for (auto& n : nodes_) {
      if (n.requires_grad && n.inputs.empty() && n.grad.empty()) n.grad = Matrix<T>::zeros_like(n.value);
      if (n.param == nullptr || n.grad.empty()) continue;
      if (!n.param->grad.same_shape(n.param->value)) n.param->zero_grad();
      kernels::axpy(n.param->grad, T{1}, n.grad);
    }
  }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
  };

  Var<T> push(Matrix<T> value, bool rg, std::vector<std::size_t> inputs, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), {}, rg, std::move(inputs), std::move(fn), nullptr});
    return Var<T>(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

}  // namespace herogcn
