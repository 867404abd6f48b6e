#pragma once

#include <span>
#include <utility>
#include <vector>

#include "clric/autograd/tensor.hpp"

// The closed op set used by the codec networks. Shapes must match exactly;
// there is no broadcasting.
namespace clric::ag {

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float factor);
Tensor relu(const Tensor& x);  // d/dx at exactly 0 is 0
Tensor exp(const Tensor& x);
// Gradient passes inside [lo, hi] and is zero outside.
Tensor clamp(const Tensor& x, float lo, float hi);
Tensor sum(const Tensor& x);
Tensor mse(const Tensor& a, const Tensor& b);
Tensor reshape(const Tensor& x, Shape shape);

// Forward rounds half away from zero; backward is the identity.
Tensor round_ste(const Tensor& x);

// input (C_in,H,W), weight (C_out,C_in,k,k) with k in {1,3}, bias (C_out).
// Zero "same" padding of width k/2.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias);

// Stride-2 transposed convolution of a single-channel map with an 8x8
// kernel. Output pixel o reads input pixels m with kernel tap o - 2m + 3,
// i.e. output sample 2i+d sits a quarter pixel either side of input i.
// Input indices outside the map are clamped to the border. The output is
// (1, out_h, out_w) with out_h <= 2H and out_w <= 2W; the defaults give the
// full (1, 2H, 2W) map.
Tensor conv_transpose2x(const Tensor& input, const Tensor& kernel, int out_h = 0, int out_w = 0);

// Stacks (c_i,H,W) tensors along the channel axis.
Tensor concat_channels(std::span<const Tensor> parts);
// Row `index` of the leading axis, keeping a leading extent of 1.
Tensor slice_channel(const Tensor& x, int index);

// Causal neighbourhood gather for a (1,h,w) grid. Returns
// (offsets.size(), 1, h*w): entry (j, 0, p) is the value at position p
// displaced by offsets[j] = (drow, dcol), or 0 outside the grid.
Tensor gather_context(const Tensor& grid, std::span<const std::pair<int, int>> offsets);

// Elementwise -log2(max(P(v), 2^-16)) where P(v) is the mass of Laplace(mu, b)
// on [v - 1/2, v + 1/2]. All three inputs share one shape; differentiable in each.
Tensor laplace_rate_bits(const Tensor& values, const Tensor& mu, const Tensor& b);

}  // namespace clric::ag
