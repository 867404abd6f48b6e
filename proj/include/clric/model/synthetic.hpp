#pragma once

#include <cstdint>

#include "clric/model/latent_tensor.hpp"

namespace clric {

// Per channel: white Gaussian noise, separable Gaussian blur (replicate
// border), then normalized to zero mean and unit variance.
LatentTensor make_smooth_latent(int channels, int height, int width, double sigma, std::uint64_t seed,
                                int image_height, int image_width);

// The bundled test latent: C=4, 64x96, sigma 8, from a 512x768 image.
LatentTensor make_reference_latent(std::uint64_t seed = 2024);

}  // namespace clric
