#include "clric/model/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "clric/error.hpp"
#include "clric/rng.hpp"

namespace clric {

namespace {

std::vector<double> gaussian_taps(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += taps[i + radius];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

}  // namespace

LatentTensor make_smooth_latent(int channels, int height, int width, double sigma, std::uint64_t seed,
                                int image_height, int image_width) {
  require(sigma > 0.0, ErrorKind::kConfiguration, "sigma must be positive");
  LatentTensor y{channels, height, width, image_height, image_width, {}};
  const auto taps = gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  Rng rng(seed);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  y.values.reserve(plane * channels);
  for (int c = 0; c < channels; ++c) {
    std::vector<double> field(plane), tmp(plane);
    for (auto& v : field) v = rng.normal();
    for (int r = 0; r < height; ++r) {
      for (int x = 0; x < width; ++x) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) acc += taps[t + radius] * field[r * width + std::clamp(x + t, 0, width - 1)];
        tmp[r * width + x] = acc;
      }
    }
    for (int r = 0; r < height; ++r) {
      for (int x = 0; x < width; ++x) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) acc += taps[t + radius] * tmp[std::clamp(r + t, 0, height - 1) * width + x];
        field[r * width + x] = acc;
      }
    }
    double mean = 0.0, var = 0.0;
    for (double v : field) mean += v;
    mean /= static_cast<double>(plane);
    for (double v : field) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(plane));
    for (double v : field) y.values.push_back(static_cast<float>(sd > 0.0 ? (v - mean) / sd : 0.0));
  }
  y.validate();
  return y;
}

LatentTensor make_reference_latent(std::uint64_t seed) { return make_smooth_latent(4, 64, 96, 8.0, seed, 512, 768); }

}  // namespace clric
