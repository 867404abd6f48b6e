#include "clric/model/synthesis.hpp"

#include "clric/autograd/ops.hpp"

namespace clric {

ag::Tensor synthesis_forward(const ag::Tensor& features, const SynthesisWeights& weights) {
  const ag::Tensor a1 = ag::relu(ag::conv2d(features, weights.w1, weights.b1));
  const ag::Tensor a2 = ag::add(ag::conv2d(a1, weights.w2, weights.b2), a1);
  const ag::Tensor a3 = ag::relu(ag::conv2d(a2, weights.w3, weights.b3));
  return ag::add(ag::conv2d(a3, weights.w4, weights.b4), a3);
}

}  // namespace clric
