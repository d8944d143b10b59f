#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trajnav/core/error.hpp"

namespace trajnav::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel_of(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

inline thread_local bool grad_mode = true;

// One vertex of the reverse-mode tape. Results of differentiable ops keep
// their inputs alive and know how to push their gradient back into them.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
  }
};

}  // namespace detail

inline bool grad_enabled() noexcept { return detail::grad_mode; }

// Disables graph construction for the lifetime of the guard.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode) { detail::grad_mode = false; }
  ~NoGradGuard() { detail::grad_mode = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Dense row-major array with an optional gradient. A Tensor is a cheap
// handle; copies share the underlying storage and tape node.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = numel_of(shape);
    return from(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }

  static Tensor full(Shape shape, T fill, bool requires_grad = false) {
    const std::size_t n = numel_of(shape);
    return from(std::move(shape), std::vector<T>(n, fill), requires_grad);
  }

  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (numel_of(shape) != values.size()) {
      throw DimensionError("tensor: shape " + to_string(shape) + " holds " +
                           std::to_string(numel_of(shape)) + " values, got " +
                           std::to_string(values.size()));
    }
    auto node = std::make_shared<detail::Node<T>>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }

  bool defined() const noexcept { return static_cast<bool>(node_); }

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }

  // Matrix view: all leading dimensions folded into rows.
  std::size_t cols() const { return rank() == 0 ? 1 : node_->shape.back(); }
  std::size_t rows() const { return cols() == 0 ? 0 : numel() / cols(); }

  std::span<const T> data() const { return node_->value; }
  std::span<T> mutable_data() { return node_->value; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  void zero_grad() { node_->grad.clear(); }

  T item() const {
    if (numel() != 1) {
      throw DimensionError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
    }
    return node_->value[0];
  }

  T at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  // Reverse pass from a scalar; accumulates into every reachable node that
  // requires a gradient.
  void backward() const;

  // Same values, no tape history.
  Tensor detach() const { return from(shape(), node_->value, false); }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace trajnav::nn
