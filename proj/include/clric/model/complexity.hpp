#pragma once

#include <cstdint>

#include "clric/model/parameters.hpp"

namespace clric {

// Decoder multiply-accumulates, absolute and per source-image pixel.
struct MacReport {
  std::uint64_t arm = 0;        // 144 per coded grid symbol
  std::uint64_t upsampler = 0;  // 16 per produced pixel per doubling
  std::uint64_t synthesis = 0;  // per latent pixel, from layer extents
  std::uint64_t fixed = 0;      // one multiply per dequantized network weight
  std::uint64_t total = 0;
  std::uint64_t image_pixels = 0;

  double per_pixel(std::uint64_t macs) const { return static_cast<double>(macs) / static_cast<double>(image_pixels); }
  double total_per_pixel() const { return per_pixel(total); }
};

inline constexpr std::uint64_t kArmMacsPerSymbol =
    kArmContextSize * kArmHidden + kArmHidden * kArmHidden + kArmHidden * kArmOutputs;
inline constexpr std::uint64_t kUpsamplerMacsPerPixel = 16;

MacReport count_macs(const ArchitectureConfig& arch, int latent_height, int latent_width, int channels,
                     int image_height, int image_width);

}  // namespace clric
