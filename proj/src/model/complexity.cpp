#include "clric/model/complexity.hpp"

#include "clric/error.hpp"
#include "clric/model/pyramid.hpp"

namespace clric {

MacReport count_macs(const ArchitectureConfig& arch, int latent_height, int latent_width, int channels,
                     int image_height, int image_width) {
  arch.validate();
  require(channels >= 1 && image_height >= 1 && image_width >= 1, ErrorKind::kConfiguration,
          "count_macs: extents must be >= 1");
  const auto shapes = pyramid_shapes(latent_height, latent_width, arch.num_grids);
  auto area = [&](int k) { return static_cast<std::uint64_t>(shapes[k].height) * shapes[k].width; };

  MacReport r;
  r.image_pixels = static_cast<std::uint64_t>(image_height) * image_width;
  for (int k = 0; k < arch.num_grids; ++k) {
    r.arm += kArmMacsPerSymbol * area(k);
    // Grid k is doubled k times, producing levels k-1 .. 0.
    for (int level = k - 1; level >= 0; --level) r.upsampler += kUpsamplerMacsPerPixel * area(level);
  }
  const std::uint64_t h = arch.synthesis_hidden, K = arch.num_grids, C = channels;
  const std::uint64_t per_latent_pixel = K * h + h * h + 9 * h * C + 9 * C * C;
  r.synthesis = per_latent_pixel * area(0);
  for (Network n : kAllNetworks) r.fixed += network_parameter_count(arch, channels, n);
  r.total = r.arm + r.upsampler + r.synthesis + r.fixed;
  return r;
}

}  // namespace clric
