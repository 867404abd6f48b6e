#include "clric/autograd/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "clric/error.hpp"

namespace clric::ag {

namespace {
thread_local bool g_grad_mode = true;
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

static void check_shape(const Shape& shape) {
  require(!shape.empty() && shape.size() <= 4, ErrorKind::kConfiguration,
          "tensor rank must be 1..4, got " + shape_string(shape));
  for (int d : shape) {
    require(d >= 1, ErrorKind::kConfiguration, "tensor extents must be >= 1: " + shape_string(shape));
  }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0f, requires_grad); }

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  check_shape(shape);
  auto node = std::make_shared<detail::Node>();
  node->values.assign(element_count(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<float> values, bool requires_grad) {
  check_shape(shape);
  require(values.size() == element_count(shape), ErrorKind::kConfiguration,
          "value count " + std::to_string(values.size()) + " does not match shape " + shape_string(shape));
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

float Tensor::item() const {
  require(numel() == 1, ErrorKind::kConfiguration, "item() on non-scalar tensor " + shape_string(shape()));
  return node_->values[0];
}

void Tensor::set_requires_grad(bool on) {
  require(node_->is_leaf, ErrorKind::kConfiguration, "requires_grad can only be set on leaf tensors");
  node_->requires_grad = on;
}

std::span<const float> Tensor::grad() const {
  if (node_->grad.empty()) node_->grad.assign(node_->values.size(), 0.0f);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0f);
}

Tensor Tensor::clone() const {
  Tensor t = from(node_->shape, node_->values, node_->requires_grad && node_->is_leaf);
  return t;
}

Tensor Tensor::detach() const { return from(node_->shape, node_->values, false); }

void backward(const Tensor& loss) {
  require(loss.defined() && loss.numel() == 1, ErrorKind::kConfiguration, "backward() needs a scalar loss");
  detail::Node* root = &loss.node();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad_buffer()[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
  for (detail::Node* node : order) {
    if (node->is_leaf) continue;
    node->backward = nullptr;
    node->parents.clear();
    node->grad.clear();
    node->grad.shrink_to_fit();
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }

bool grad_mode_enabled() { return g_grad_mode; }

}  // namespace clric::ag
