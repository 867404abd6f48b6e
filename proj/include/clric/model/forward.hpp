#pragma once

#include <vector>

#include "clric/autograd/tensor.hpp"
#include "clric/model/parameters.hpp"
#include "clric/rng.hpp"

namespace clric {

enum class QuantizationMode {
  kNoise,    // grid + U[-1/2, 1/2)
  kHardSte,  // round(grid), straight-through gradient
  kNone,     // grids used as stored (already integer for decoding)
};

struct ForwardResult {
  ag::Tensor reconstruction;  // (C,H,W)
  ag::Tensor rate_bits;       // scalar, summed over all grid coefficients
};

// One differentiable evaluation of the overfitted function: grids are
// perturbed per `mode`, then upsampled, synthesized, and priced by the ARM.
// `rng` is required for kNoise.
ForwardResult forward(const CodecParameters& params, QuantizationMode mode, Rng* rng);

// The reconstruction path shared by encoder and decoder. Requires integer
// grids; runs without recording gradients; output is (C,H,W) row-major.
std::vector<float> decode_latent(const CodecParameters& params);

}  // namespace clric
