#include "clric/entropy/grid_coder.hpp"

#include <algorithm>
#include <string>

#include "clric/error.hpp"
#include "clric/model/arm.hpp"

namespace clric::entropy {

namespace {

void check_bounds(const SymbolBounds& bounds) {
  require(bounds.min <= bounds.max && bounds.width() <= kMaxCdfSymbols, ErrorKind::kSymbolOutOfRange,
          "grid symbol bounds [" + std::to_string(bounds.min) + ", " + std::to_string(bounds.max) +
              "] are empty or wider than 2^15");
}

// Visits every position in raster order with the model for that symbol.
// `value_at` returns the symbol for a position, after which it is visible
// as context to later positions.
template <typename ValueAt>
void scan(int height, int width, const SymbolBounds& bounds, const ArmWeights& arm, ValueAt value_at) {
  std::vector<float> seen(static_cast<std::size_t>(height) * width, 0.0f);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const LaplaceParams p = arm_forward(extract_context(seen, height, width, r, c), arm);
      const QuantizedCdf cdf = quantize_cdf(p, bounds.min, bounds.max);
      const std::size_t i = static_cast<std::size_t>(r) * width + c;
      seen[i] = static_cast<float>(value_at(i, cdf));
    }
  }
}

}  // namespace

SymbolBounds grid_bounds(const IntGrid& grid) {
  require(!grid.values.empty(), ErrorKind::kConfiguration, "empty grid");
  const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
  return {*lo, *hi};
}

void encode_grid(const IntGrid& grid, const SymbolBounds& bounds, const ArmWeights& arm, RangeEncoder& enc) {
  check_bounds(bounds);
  scan(grid.height, grid.width, bounds, arm, [&](std::size_t i, const QuantizedCdf& cdf) {
    enc.encode_symbol(grid.values[i], cdf);
    return grid.values[i];
  });
}

IntGrid decode_grid(int height, int width, const SymbolBounds& bounds, const ArmWeights& arm, RangeDecoder& dec) {
  check_bounds(bounds);
  IntGrid grid{height, width, std::vector<std::int32_t>(static_cast<std::size_t>(height) * width)};
  scan(height, width, bounds, arm, [&](std::size_t i, const QuantizedCdf& cdf) {
    grid.values[i] = dec.decode_symbol(cdf);
    return grid.values[i];
  });
  return grid;
}

double grid_estimate_bits(const IntGrid& grid, const SymbolBounds& bounds, const ArmWeights& arm) {
  check_bounds(bounds);
  double bits = 0.0;
  scan(grid.height, grid.width, bounds, arm, [&](std::size_t i, const QuantizedCdf& cdf) {
    require(cdf.contains(grid.values[i]), ErrorKind::kSymbolOutOfRange, "grid value outside its bounds");
    bits += cdf.bits(grid.values[i]);
    return grid.values[i];
  });
  return bits;
}

}  // namespace clric::entropy
