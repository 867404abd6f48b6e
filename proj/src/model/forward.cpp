#include "clric/model/forward.hpp"

#include "clric/autograd/ops.hpp"
#include "clric/error.hpp"
#include "clric/model/arm.hpp"
#include "clric/model/pyramid.hpp"
#include "clric/model/synthesis.hpp"
#include "clric/model/upsampler.hpp"

namespace clric {

ForwardResult forward(const CodecParameters& params, QuantizationMode mode, Rng* rng) {
  require(mode != QuantizationMode::kNoise || rng != nullptr, ErrorKind::kConfiguration,
          "noise quantization needs a generator");
  std::vector<ag::Tensor> grids;
  grids.reserve(params.pyramid.grids.size());
  for (const auto& g : params.pyramid.grids) {
    switch (mode) {
      case QuantizationMode::kNoise: grids.push_back(add_uniform_noise(g, *rng)); break;
      case QuantizationMode::kHardSte: grids.push_back(ag::round_ste(g)); break;
      case QuantizationMode::kNone: grids.push_back(g); break;
    }
  }

  const ag::Tensor features = upsample_pyramid(grids, params.upsampler.kernel, params.height, params.width);
  ForwardResult result;
  result.reconstruction = synthesis_forward(features, params.synthesis);

  ag::Tensor total;
  for (const auto& g : grids) {
    const ag::Tensor bits = grid_rate_bits(g, params.arm);
    total = total.defined() ? ag::add(total, bits) : bits;
  }
  result.rate_bits = total;
  return result;
}

std::vector<float> decode_latent(const CodecParameters& params) {
  params.validate();
  require(pyramid_is_integer(params.pyramid), ErrorKind::kConfiguration,
          "decode_latent needs hard-quantized (integer) grids");
  ag::NoGradGuard no_grad;
  const ag::Tensor features =
      upsample_pyramid(params.pyramid.grids, params.upsampler.kernel, params.height, params.width);
  const ag::Tensor y = synthesis_forward(features, params.synthesis);
  return {y.values().begin(), y.values().end()};
}

}  // namespace clric
