#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clric/autograd/tensor.hpp"
#include "clric/model/parameters.hpp"
#include "clric/rng.hpp"

namespace clric {

struct GridShape {
  int height = 0;
  int width = 0;
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

// (ceil(H/2^k), ceil(W/2^k)) for k = 0..K-1.
std::vector<GridShape> pyramid_shapes(int height, int width, int levels);

// All-zero trainable grids.
GridPyramid init_pyramid(int height, int width, int levels);

// grid + u with u ~ U[-1/2, 1/2) per element. The noise is a constant, so
// gradients reach the grid unchanged.
ag::Tensor add_uniform_noise(const ag::Tensor& grid, Rng& rng);

inline constexpr std::int32_t kSymbolMin = -32768;
inline constexpr std::int32_t kSymbolMax = 32767;

struct QuantizeStats {
  std::size_t clamped = 0;
};

// Round half away from zero, clamped to the i16 symbol range.
std::int32_t quantize_value(float value, QuantizeStats* stats = nullptr);

struct IntGrid {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> values;

  friend bool operator==(const IntGrid&, const IntGrid&) = default;
};

IntGrid quantize_round(const ag::Tensor& grid, QuantizeStats* stats = nullptr);
ag::Tensor int_grid_tensor(const IntGrid& grid, bool requires_grad = false);

// Replaces every grid by its rounded values (integer-valued floats).
void hard_quantize_pyramid(GridPyramid& pyramid, QuantizeStats* stats = nullptr);
bool pyramid_is_integer(const GridPyramid& pyramid);

}  // namespace clric
