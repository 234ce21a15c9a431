#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "asmlp/tensor.hpp"

namespace asmlp {

template <std::floating_point T>
class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; valid while the tape lives.
template <std::floating_point T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape() const noexcept { return tape_; }
  std::uint32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Tensor<T>& value() const;
  const Shape& dims() const { return value().dims(); }
  std::size_t dim(std::size_t axis) const { return value().dim(axis); }

 private:
  Tape<T>* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Wengert list for reverse-mode differentiation. Each recorded node owns a copy
/// of its value; backward closures capture whatever else they need by value.
template <std::floating_point T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> leaf(Tensor<T> value, bool requires_grad = true) {
    return push(std::move(value), requires_grad, nullptr);
  }
  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }

  /// Records the result of a primitive. `fn` is dropped when no input needs a gradient.
  Var<T> record(Tensor<T> out, std::initializer_list<Var<T>> inputs, BackwardFn fn) {
    return record(std::move(out), std::vector<Var<T>>(inputs), std::move(fn));
  }

  Var<T> record(Tensor<T> out, const std::vector<Var<T>>& inputs, BackwardFn fn) {
    bool needs = false;
    for (const auto& in : inputs) {
      check_owned(in);
      needs = needs || nodes_[in.id()].requires_grad;
    }
    if (!out.is_meta() && !out.all_finite()) {
      throw NonFiniteError("tape: non-finite value produced by a primitive (node " +
                           std::to_string(nodes_.size()) + ")");
    }
    return push(std::move(out), needs, needs ? std::move(fn) : nullptr);
  }

  const Tensor<T>& value(Var<T> v) const {
    check_owned(v);
    return nodes_[v.id()].value;
  }

  bool requires_grad(Var<T> v) const {
    check_owned(v);
    return nodes_[v.id()].requires_grad;
  }

  bool has_grad(Var<T> v) const {
    check_owned(v);
    return nodes_[v.id()].grad.has_value();
  }

  /// Gradient of the last backward() loss w.r.t. v; zeros if v did not influence it.
  Tensor<T> grad(Var<T> v) const {
    check_owned(v);
    const auto& node = nodes_[v.id()];
    if (node.grad) return *node.grad;
    return Tensor<T>(node.value.dims());
  }

  /// Adds g into the gradient slot of v (no-op for nodes that do not require grad).
  void accumulate(Var<T> v, const Tensor<T>& g) {
    auto& node = nodes_[v.id()];
    if (!node.requires_grad) return;
    if (g.dims() != node.value.dims()) {
      throw ShapeError("tape: gradient " + shape_str(g.dims()) + " for value " +
                       shape_str(node.value.dims()));
    }
    if (!node.grad) {
      node.grad = g;
      return;
    }
    auto dst = node.grad->data();
    auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  void accumulate(Var<T> v, Tensor<T>&& g) {
    auto& node = nodes_[v.id()];
    if (node.requires_grad && !node.grad && g.dims() == node.value.dims()) {
      node.grad = std::move(g);
      return;
    }
    accumulate(v, static_cast<const Tensor<T>&>(g));
  }

  /// Seeds d(loss)/d(loss) = 1 and replays backward closures in reverse recording order.
  void backward(Var<T> loss) {
    check_owned(loss);
    const auto& lv = nodes_[loss.id()].value;
    if (lv.is_meta()) throw std::logic_error("backward: loss is a shape-only tensor");
    if (lv.numel() != 1) {
      throw ShapeError("backward: loss must be scalar, got " + shape_str(lv.dims()));
    }
    if (!nodes_[loss.id()].requires_grad) {
      throw std::logic_error("backward: loss does not depend on any requires_grad leaf");
    }
    for (auto& n : nodes_) n.grad.reset();
    nodes_[loss.id()].grad = Tensor<T>(lv.dims(), T(1));
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      auto& node = nodes_[i];
      if (!node.backward || !node.grad) continue;
      // Closures only accumulate into their inputs, which have smaller ids.
      node.backward(*this, *node.grad);
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  void check_owned(Var<T> v) const {
    if (v.tape() != this || v.id() >= nodes_.size()) {
      throw std::logic_error("tape: variable does not belong to this tape");
    }
  }

 private:
  struct Node {
    Tensor<T> value;
    bool requires_grad = false;
    BackwardFn backward;
    std::optional<Tensor<T>> grad;
  };

  Var<T> push(Tensor<T> value, bool requires_grad, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), requires_grad, std::move(fn), std::nullopt});
    return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
  }

  std::vector<Node> nodes_;
};

template <std::floating_point T>
const Tensor<T>& Var<T>::value() const {
  if (!tape_) throw std::logic_error("var: detached from any tape");
  return tape_->value(*this);
}

}  // namespace asmlp
