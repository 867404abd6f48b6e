#pragma once

#include "clric/autograd/tensor.hpp"
#include "clric/model/parameters.hpp"

namespace clric {

// features (K,H,W) -> latent estimate (C,H,W):
//   a1 = relu(conv1x1(f));  a2 = conv1x1(a1) + a1;
//   a3 = relu(conv3x3(a2)); out = conv3x3(a3) + a3.
ag::Tensor synthesis_forward(const ag::Tensor& features, const SynthesisWeights& weights);

}  // namespace clric
