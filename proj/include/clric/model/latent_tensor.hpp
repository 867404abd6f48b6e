#pragma once

#include <vector>

#include "clric/autograd/tensor.hpp"

namespace clric {

// Target latent y, layout (C,H,W), plus the source image extents used for
// bits-per-pixel accounting.
struct LatentTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  int image_height = 0;
  int image_width = 0;
  std::vector<float> values;

  std::size_t image_pixels() const { return static_cast<std::size_t>(image_height) * image_width; }
  ag::Tensor as_tensor() const;

  // Throws kConfiguration on bad extents, kNonFinite on NaN/Inf.
  void validate() const;
};

}  // namespace clric
