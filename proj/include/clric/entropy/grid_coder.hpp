#pragma once

#include <cstdint>
#include <vector>

#include "clric/entropy/range_coder.hpp"
#include "clric/model/parameters.hpp"
#include "clric/model/pyramid.hpp"

namespace clric::entropy {

struct SymbolBounds {
  std::int32_t min = 0;
  std::int32_t max = 0;

  std::int64_t width() const { return static_cast<std::int64_t>(max) - min + 1; }
  friend bool operator==(const SymbolBounds&, const SymbolBounds&) = default;
};

SymbolBounds grid_bounds(const IntGrid& grid);

// Raster scan; each symbol is coded under quantize_cdf(arm_forward(context),
// bounds). The context comes from symbols already coded in the same grid.
// Throws kSymbolOutOfRange if a value lies outside `bounds` or the bounds
// are wider than the CDF limit.
void encode_grid(const IntGrid& grid, const SymbolBounds& bounds, const ArmWeights& arm, RangeEncoder& enc);
IntGrid decode_grid(int height, int width, const SymbolBounds& bounds, const ArmWeights& arm, RangeDecoder& dec);

// Sum of -log2(freq / 2^16) over the grid, using the same tables the coder uses.
double grid_estimate_bits(const IntGrid& grid, const SymbolBounds& bounds, const ArmWeights& arm);

}  // namespace clric::entropy
