#include "clric/model/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "clric/autograd/ops.hpp"
#include "clric/error.hpp"

namespace clric {

std::vector<GridShape> pyramid_shapes(int height, int width, int levels) {
  require(height >= 1 && width >= 1 && levels >= 1, ErrorKind::kConfiguration, "pyramid extents must be >= 1");
  std::vector<GridShape> shapes;
  shapes.reserve(levels);
  for (int k = 0; k < levels; ++k) {
    const long long div = 1LL << std::min(k, 62);
    shapes.push_back({static_cast<int>((height + div - 1) / div), static_cast<int>((width + div - 1) / div)});
  }
  return shapes;
}

GridPyramid init_pyramid(int height, int width, int levels) {
  GridPyramid pyramid;
  for (const auto& s : pyramid_shapes(height, width, levels)) {
    pyramid.grids.push_back(ag::Tensor::zeros({1, s.height, s.width}, true));
  }
  return pyramid;
}

ag::Tensor add_uniform_noise(const ag::Tensor& grid, Rng& rng) {
  std::vector<float> noise(grid.numel());
  for (auto& u : noise) u = rng.uniform01() - 0.5f;
  return ag::add(grid, ag::Tensor::from(grid.shape(), std::move(noise)));
}

std::int32_t quantize_value(float value, QuantizeStats* stats) {
  const float r = std::round(value);
  if (!(r >= static_cast<float>(kSymbolMin))) {
    if (stats) ++stats->clamped;
    return kSymbolMin;
  }
  if (r > static_cast<float>(kSymbolMax)) {
    if (stats) ++stats->clamped;
    return kSymbolMax;
  }
  return static_cast<std::int32_t>(r);
}

IntGrid quantize_round(const ag::Tensor& grid, QuantizeStats* stats) {
  require(grid.rank() == 3 && grid.dim(0) == 1, ErrorKind::kConfiguration, "quantize_round: grid must be (1,h,w)");
  IntGrid out{grid.dim(1), grid.dim(2), {}};
  out.values.reserve(grid.numel());
  for (float v : grid.values()) out.values.push_back(quantize_value(v, stats));
  return out;
}

ag::Tensor int_grid_tensor(const IntGrid& grid, bool requires_grad) {
  std::vector<float> values(grid.values.begin(), grid.values.end());
  return ag::Tensor::from({1, grid.height, grid.width}, std::move(values), requires_grad);
}

void hard_quantize_pyramid(GridPyramid& pyramid, QuantizeStats* stats) {
  for (auto& g : pyramid.grids) {
    auto values = g.mutable_values();
    for (auto& v : values) v = static_cast<float>(quantize_value(v, stats));
  }
}

bool pyramid_is_integer(const GridPyramid& pyramid) {
  for (const auto& g : pyramid.grids) {
    for (float v : g.values()) {
      if (v != std::round(v) || v < kSymbolMin || v > kSymbolMax) return false;
    }
  }
  return true;
}

}  // namespace clric
