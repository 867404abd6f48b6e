#include "clric/model/upsampler.hpp"

#include <cmath>
#include <vector>

#include "clric/autograd/ops.hpp"
#include "clric/error.hpp"
#include "clric/model/pyramid.hpp"

namespace clric {

double cubic_kernel(double x, double a) {
  const double t = std::abs(x);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

std::array<float, 8> bicubic_taps(double a) {
  std::array<float, 8> taps{};
  for (int t = 0; t < 8; ++t) taps[t] = static_cast<float>(cubic_kernel((t - 3.5) / 2.0, a));
  return taps;
}

ag::Tensor bicubic_kernel() {
  const auto taps = bicubic_taps();
  std::vector<float> k(64);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) k[y * 8 + x] = taps[y] * taps[x];
  }
  return ag::Tensor::from({8, 8}, std::move(k));
}

ag::Tensor upsample_pyramid(std::span<const ag::Tensor> grids, const ag::Tensor& kernel, int height, int width) {
  const int levels = static_cast<int>(grids.size());
  const auto shapes = pyramid_shapes(height, width, levels);
  std::vector<ag::Tensor> channels;
  channels.reserve(levels);
  for (int k = 0; k < levels; ++k) {
    require(grids[k].shape() == ag::Shape({1, shapes[k].height, shapes[k].width}), ErrorKind::kConfiguration,
            "upsample_pyramid: grid " + std::to_string(k) + " has shape " + ag::shape_string(grids[k].shape()));
    ag::Tensor x = grids[k];
    for (int level = k - 1; level >= 0; --level) {
      x = ag::conv_transpose2x(x, kernel, shapes[level].height, shapes[level].width);
    }
    channels.push_back(x);
  }
  return ag::concat_channels(channels);
}

}  // namespace clric
