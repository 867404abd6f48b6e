#include "clric/autograd/adam.hpp"

#include <cmath>

#include "clric/error.hpp"

namespace clric::ag {

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    require(p.defined() && p.requires_grad(), ErrorKind::kConfiguration, "Adam: parameters must be trainable");
    m_.emplace_back(p.numel(), 0.0f);
    v_.emplace_back(p.numel(), 0.0f);
  }
}

void Adam::step(float lr) {
  require(lr > 0.0f, ErrorKind::kConfiguration, "Adam: learning rate must be positive");
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const float bc1 = static_cast<float>(1.0 - std::pow(static_cast<double>(config_.beta1), t));
  const float bc2 = static_cast<float>(1.0 - std::pow(static_cast<double>(config_.beta2), t));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto w = p.mutable_values();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0f - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0f - config_.beta2) * g[i] * g[i];
      const float m_hat = m[i] / bc1;
      const float v_hat = v[i] / bc2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace clric::ag
