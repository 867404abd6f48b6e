#pragma once

#include <array>
#include <span>
#include <utility>

#include "clric/autograd/tensor.hpp"
#include "clric/model/parameters.hpp"

namespace clric {

// Causal neighbourhood under raster scan, as (drow, dcol), in context order:
// two to the left on the current row, five on the row above, one two rows up.
inline constexpr std::array<std::pair<int, int>, kArmContextSize> kContextOffsets = {{
    {0, -1}, {0, -2}, {-1, -2}, {-1, -1}, {-1, 0}, {-1, 1}, {-1, 2}, {-2, 0},
}};

inline constexpr float kMinLaplaceScale = 1e-2f;
inline constexpr float kMaxLaplaceScale = 1e3f;

struct LaplaceParams {
  float mu = 0.0f;
  float scale = 1.0f;  // b, clamped to [kMinLaplaceScale, kMaxLaplaceScale]
};

using Context = std::array<float, kArmContextSize>;

// Neighbour values of (row, col) in a row-major h x w grid, 0 outside.
Context extract_context(std::span<const float> grid, int height, int width, int row, int col);

// Per-symbol evaluation. The entropy coder uses this path on both sides, so
// its arithmetic order is fixed.
LaplaceParams arm_forward(const Context& context, const ArmWeights& weights);

// Same network over every position of a (1,h,w) grid at once; differentiable.
struct ArmBatch {
  ag::Tensor mu;     // (1,1,h*w)
  ag::Tensor scale;  // (1,1,h*w)
};
ArmBatch arm_forward_batch(const ag::Tensor& grid, const ArmWeights& weights);

// -log2(max(CDF(v + 1/2) - CDF(v - 1/2), 2^-16)) under Laplace(mu, b).
double rate_bits(double value, const LaplaceParams& p);

// Total bits of one grid under the ARM, contexts drawn from the same grid.
ag::Tensor grid_rate_bits(const ag::Tensor& grid, const ArmWeights& weights);

}  // namespace clric
