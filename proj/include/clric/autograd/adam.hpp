#pragma once

#include <cstdint>
#include <vector>

#include "clric/autograd/tensor.hpp"

namespace clric::ag {

struct AdamConfig {
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

// Adam with bias correction over a fixed list of leaf tensors.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, AdamConfig config = {});

  // One update using the gradients currently accumulated on the parameters.
  void step(float lr);
  void zero_grad();

  std::int64_t step_count() const { return step_count_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::vector<float>>& first_moments() const { return m_; }
  const std::vector<std::vector<float>>& second_moments() const { return v_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  std::int64_t step_count_ = 0;
};

}  // namespace clric::ag
