#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "clric/autograd/tensor.hpp"
#include "clric/io/bitstream.hpp"
#include "clric/model/forward.hpp"
#include "clric/model/latent_tensor.hpp"
#include "clric/train/rd_config.hpp"

namespace clric::train {

// mse(y, y_hat) + lambda * rate_bits / image_pixels, for kNoise or kHardSte.
struct LossTerms {
  ag::Tensor loss;
  ag::Tensor distortion;
  ag::Tensor rate_bits;
};
LossTerms rd_loss(const LatentTensor& y, const ag::Tensor& target, const CodecParameters& params, double lambda,
                  QuantizationMode mode, Rng* rng);

struct PhaseTrace {
  Phase phase = Phase::kWarmup;
  int candidate = 0;
  std::vector<float> losses;  // one per optimizer step
};

struct CandidateSummary {
  int index = 0;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  double last_loss = 0.0;  // loss at the last step taken
  bool failed = false;
  std::string error;
};

struct TrainingReport {
  std::vector<PhaseTrace> traces;
  std::vector<CandidateSummary> candidates;
  int chosen_candidate = 0;
  std::uint64_t chosen_seed = 0;
  std::int64_t optimizer_steps = 0;  // summed over every candidate
  double initial_loss = 0.0;         // chosen candidate, first step
  double final_loss = 0.0;           // distortion + lambda * file bits / image pixels
  double distortion = 0.0;           // mse(y, decode_latent(params))
  double file_bits = 0.0;
  double bpp = 0.0;
  double estimate_bits = 0.0;        // header + quantized-CDF cost of every segment
  double grid_estimate_bits = 0.0;
  double weight_estimate_bits = 0.0;
  double weight_payload_bits = 0.0;  // bytes of the three network segments
  double grid_payload_bits = 0.0;
  io::WeightSteps step_exponents{};
  std::size_t clamped_symbols = 0;
  double wall_seconds = 0.0;
};

struct TrainingResult {
  CodecParameters params;  // hard-quantized, weights on their steps
  io::SerializedBitstream bitstream;
  std::vector<float> reconstruction;  // decode_latent(params)
  TrainingReport report;
};

using ProgressFn = std::function<void(const std::string&)>;

// Warm-up candidates from derive_seed(config.seed, index), finalists by
// (loss, index), one main run, then rounding, weight-step search and
// serialization. Throws kTraining if every candidate diverges.
TrainingResult train(const LatentTensor& y, const RdConfig& config, const ProgressFn& progress = {});

}  // namespace clric::train
