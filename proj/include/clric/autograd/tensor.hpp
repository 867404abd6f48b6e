#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace clric::ag {

// Up to four extents, row-major. (C,H,W) tensors are channel-major.
using Shape = std::vector<int>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<float> values;
  std::vector<float> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<float>& grad_buffer() {
    if (grad.empty()) grad.assign(values.size(), 0.0f);
    return grad;
  }
};

}  // namespace detail

// Handle to a dense float tensor. Copies share storage; use clone() for a
// deep copy. Operations over trainable tensors record a backward closure on
// the result; backward() walks those records once and then drops them.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<float> values, bool requires_grad = false);
  static Tensor scalar(float value) { return from({1}, {value}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(std::size_t i) const { return node_->shape.at(i); }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  std::size_t numel() const { return node_->values.size(); }

  std::span<const float> values() const { return node_->values; }
  std::span<float> mutable_values() { return node_->values; }
  float item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on);

  // Zero-filled span of numel() entries if no gradient has been accumulated.
  std::span<const float> grad() const;
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad();

  // Deep copy of values only; the copy is a fresh leaf.
  Tensor clone() const;
  // Same values, no recorded history, no gradient.
  Tensor detach() const;

  detail::Node& node() const { return *node_; }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Gradients of a scalar loss into every trainable leaf it depends on.
// Leaf gradients accumulate across calls until zero_grad(); the recorded
// graph behind `loss` is released afterwards.
void backward(const Tensor& loss);

// Disables recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

}  // namespace clric::ag
