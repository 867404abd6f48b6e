#include "clric/model/latent_tensor.hpp"

#include <cmath>
#include <string>

#include "clric/error.hpp"

namespace clric {

ag::Tensor LatentTensor::as_tensor() const { return ag::Tensor::from({channels, height, width}, values); }

void LatentTensor::validate() const {
  require(channels >= 1 && height >= 1 && width >= 1, ErrorKind::kConfiguration, "latent extents must be >= 1");
  require(height <= image_height && width <= image_width, ErrorKind::kConfiguration,
          "latent extents exceed image extents (" + std::to_string(height) + "x" + std::to_string(width) + " vs " +
              std::to_string(image_height) + "x" + std::to_string(image_width) + ")");
  require(values.size() == static_cast<std::size_t>(channels) * height * width, ErrorKind::kConfiguration,
          "latent value count does not match extents");
  for (float v : values) require(std::isfinite(v), ErrorKind::kNonFinite, "latent contains NaN or Inf");
}

}  // namespace clric
