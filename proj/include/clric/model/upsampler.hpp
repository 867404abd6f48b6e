#pragma once

#include <array>
#include <span>

#include "clric/autograd/tensor.hpp"

namespace clric {

// Keys cubic convolution kernel with parameter a.
double cubic_kernel(double x, double a = -0.5);

// The 8 one-dimensional taps of a 2x bicubic upsampler: cubic((t - 3.5) / 2).
// Odd taps serve even output samples and even taps odd ones; each set sums to 1.
std::array<float, 8> bicubic_taps(double a = -0.5);

// Separable 8x8 outer product of bicubic_taps(); trainable flag off.
ag::Tensor bicubic_kernel();

// Upsamples grid k with k stride-2 transposed convolutions sharing `kernel`,
// cropping after each step to the next finer pyramid shape, and stacks the
// results into (K, height, width). Grid 0 passes through unchanged.
ag::Tensor upsample_pyramid(std::span<const ag::Tensor> grids, const ag::Tensor& kernel, int height, int width);

}  // namespace clric
