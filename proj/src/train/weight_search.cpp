#include "clric/train/weight_search.hpp"

#include <optional>

#include "clric/entropy/weight_coder.hpp"
#include "clric/error.hpp"
#include "clric/model/forward.hpp"

namespace clric::train {

namespace {

double latent_mse(const std::vector<float>& a, const std::vector<float>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

bool feasible(const CodecParameters& params, Network net, int exponent) {
  try {
    entropy::quantize_weights(flatten_network(params, net), exponent);
    return true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSymbolOutOfRange) throw;
    return false;
  }
}

}  // namespace

WeightSearchResult evaluate_weight_steps(const CodecParameters& params, const LatentTensor& y, double lambda,
                                         const io::WeightSteps& exponents) {
  WeightSearchResult r;
  r.params = params.clone();
  io::apply_weight_steps(r.params, exponents);
  r.exponents = exponents;
  r.distortion = latent_mse(y.values, decode_latent(r.params));
  r.bits = 8.0 * static_cast<double>(
                     io::serialize_bitstream(r.params, y.image_height, y.image_width, exponents).bytes.size());
  r.loss = r.distortion + lambda * r.bits / static_cast<double>(y.image_pixels());
  r.evaluations = 1;
  return r;
}

WeightSearchResult quantize_weights_search(const CodecParameters& params, const LatentTensor& y, double lambda) {
  io::WeightSteps current{};
  for (std::size_t i = 0; i < kAllNetworks.size(); ++i) {
    int e = entropy::kMinStepExponent;
    while (e <= entropy::kMaxStepExponent && !feasible(params, kAllNetworks[i], e)) ++e;
    require(e <= entropy::kMaxStepExponent, ErrorKind::kTraining,
            std::string(network_name(kAllNetworks[i])) + " weights too large for any step");
    current[i] = e;
  }

  int evaluations = 0;
  std::optional<WeightSearchResult> best;
  for (std::size_t i = 0; i < kAllNetworks.size(); ++i) {
    std::optional<WeightSearchResult> net_best;
    for (int k = 0; k <= -entropy::kMinStepExponent; ++k) {
      const int e = -k;
      if (!feasible(params, kAllNetworks[i], e)) continue;
      io::WeightSteps trial = current;
      trial[i] = e;
      WeightSearchResult r = evaluate_weight_steps(params, y, lambda, trial);
      ++evaluations;
      if (!net_best || r.loss < net_best->loss) net_best = std::move(r);
    }
    current = net_best->exponents;
    best = std::move(net_best);
  }
  best->evaluations = evaluations;
  return std::move(*best);
}

}  // namespace clric::train
