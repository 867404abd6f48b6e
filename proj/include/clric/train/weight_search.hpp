#pragma once

#include "clric/io/bitstream.hpp"
#include "clric/model/latent_tensor.hpp"
#include "clric/model/parameters.hpp"

namespace clric::train {

struct WeightSearchResult {
  CodecParameters params;  // weights rounded to the chosen steps
  io::WeightSteps exponents{};
  double distortion = 0.0;  // mse(y, decode_latent(params))
  double bits = 0.0;        // size of the full bitstream
  double loss = 0.0;        // distortion + lambda * bits / image pixels
  int evaluations = 0;
};

// Cost of one configuration, measured on the real decoder output and the
// real serialized size. Throws kSymbolOutOfRange if a step is infeasible.
WeightSearchResult evaluate_weight_steps(const CodecParameters& params, const LatentTensor& y, double lambda,
                                         const io::WeightSteps& exponents);

// Coordinate search over steps 2^-k, k = 0..12: every network starts at
// its finest feasible step, then ARM, upsampler and synthesis are chosen in
// turn with the others held fixed. Ties keep the larger step. Grids must
// already be integer.
WeightSearchResult quantize_weights_search(const CodecParameters& params, const LatentTensor& y, double lambda);

}  // namespace clric::train
