#include "clric/train/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <thread>

#include "clric/autograd/adam.hpp"
#include "clric/autograd/ops.hpp"
#include "clric/error.hpp"
#include "clric/model/pyramid.hpp"
#include "clric/train/weight_search.hpp"

namespace clric::train {

LossTerms rd_loss(const LatentTensor& y, const ag::Tensor& target, const CodecParameters& params, double lambda,
                  QuantizationMode mode, Rng* rng) {
  require(lambda >= 0.0, ErrorKind::kConfiguration, "lambda must be >= 0");
  require(mode != QuantizationMode::kNone, ErrorKind::kConfiguration, "training loss needs a quantization proxy");
  const ForwardResult f = forward(params, mode, rng);
  LossTerms t;
  t.distortion = ag::mse(f.reconstruction, target);
  t.rate_bits = f.rate_bits;
  const auto weight = static_cast<float>(lambda / static_cast<double>(y.image_pixels()));
  t.loss = ag::add(t.distortion, ag::scale(t.rate_bits, weight));
  return t;
}

namespace {

struct Candidate {
  int index = 0;
  std::uint64_t seed = 0;
  CodecParameters params;
  std::unique_ptr<ag::Adam> optimizer;
  std::unique_ptr<Rng> rng;
  std::int64_t steps = 0;
  double first_loss = 0.0;
  double last_loss = 0.0;
  bool failed = false;
  std::string error;
  std::vector<PhaseTrace> traces;
};

void run_phase(Candidate& c, const LatentTensor& y, const ag::Tensor& target, const RdConfig& config, Phase phase,
               int iters) {
  PhaseTrace trace{phase, c.index, {}};
  trace.losses.reserve(iters);
  for (int i = 0; i < iters && !c.failed; ++i) {
    const bool hard = phase == Phase::kMain && i >= config.main_iters - config.hard_quant_tail;
    const QuantizationMode mode = hard ? QuantizationMode::kHardSte : QuantizationMode::kNoise;
    c.optimizer->zero_grad();
    const LossTerms terms = rd_loss(y, target, c.params, config.lambda, mode, c.rng.get());
    const double loss = terms.loss.item();
    if (!std::isfinite(loss)) {
      c.failed = true;
      c.error = std::string("non-finite loss in ") + phase_name(phase) + " step " + std::to_string(i);
      break;
    }
    ag::backward(terms.loss);
    c.optimizer->step(lr_schedule(phase, i, config));
    if (c.steps == 0) c.first_loss = loss;
    ++c.steps;
    c.last_loss = loss;
    trace.losses.push_back(static_cast<float>(loss));
  }
  c.traces.push_back(std::move(trace));
}

// Runs `iters` steps on each selected candidate, `threads` at a time. Each
// candidate owns all of its state, so the outcome does not depend on the
// thread count.
void run_parallel(std::vector<Candidate*> selected, const LatentTensor& y, const ag::Tensor& target,
                  const RdConfig& config, Phase phase, int iters) {
  const std::size_t workers = std::min<std::size_t>(config.threads, selected.size());
  if (workers <= 1) {
    for (auto* c : selected) run_phase(*c, y, target, config, phase, iters);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < selected.size(); i = next++) run_phase(*selected[i], y, target, config, phase, iters);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Survivors ordered by (loss, index), at most `keep` of them.
std::vector<Candidate*> rank(std::vector<Candidate*> pool, std::size_t keep) {
  std::erase_if(pool, [](const Candidate* c) { return c->failed; });
  std::sort(pool.begin(), pool.end(), [](const Candidate* a, const Candidate* b) {
    return a->last_loss != b->last_loss ? a->last_loss < b->last_loss : a->index < b->index;
  });
  if (pool.size() > keep) pool.resize(keep);
  return pool;
}

void require_survivor(const std::vector<Candidate*>& alive, const std::vector<Candidate>& all) {
  if (!alive.empty()) return;
  std::string why;
  for (const auto& c : all) why += "\n  candidate " + std::to_string(c.index) + ": " + c.error;
  fail(ErrorKind::kTraining, "every training candidate diverged" + why);
}

}  // namespace

TrainingResult train(const LatentTensor& y, const RdConfig& config, const ProgressFn& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  y.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const ag::Tensor target = y.as_tensor();

  std::vector<Candidate> candidates(config.warmup_candidates);
  for (int i = 0; i < config.warmup_candidates; ++i) {
    Candidate& c = candidates[i];
    c.index = i;
    c.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
    c.params = init_codec_parameters(config.arch, y.channels, y.height, y.width, c.seed);
    c.optimizer = std::make_unique<ag::Adam>(c.params.trainable());
    c.rng = std::make_unique<Rng>(derive_seed(c.seed, 0x6E6F697365ull));
  }

  std::vector<Candidate*> all;
  for (auto& c : candidates) all.push_back(&c);
  say("warm-up: " + std::to_string(all.size()) + " candidates x " + std::to_string(config.warmup_iters));
  run_parallel(all, y, target, config, Phase::kWarmup, config.warmup_iters);

  const auto finalists = rank(all, static_cast<std::size_t>(config.finalist_count));
  require_survivor(finalists, candidates);
  say("finalists: " + std::to_string(finalists.size()) + " x " + std::to_string(config.finalist_iters));
  run_parallel(finalists, y, target, config, Phase::kFinalist, config.finalist_iters);

  const auto winner = rank(finalists, 1);
  require_survivor(winner, candidates);
  Candidate& best = *winner.front();
  say("main: candidate " + std::to_string(best.index) + " x " + std::to_string(config.main_iters));
  run_phase(best, y, target, config, Phase::kMain, config.main_iters);
  if (best.failed) fail(ErrorKind::kTraining, "main phase diverged: " + best.error);

  TrainingResult result;
  TrainingReport& report = result.report;
  for (const auto& c : candidates) {
    report.candidates.push_back({c.index, c.seed, c.steps, c.last_loss, c.failed, c.error});
    report.optimizer_steps += c.steps;
    for (const auto& t : c.traces) report.traces.push_back(t);
  }
  report.chosen_candidate = best.index;
  report.chosen_seed = best.seed;
  report.initial_loss = best.first_loss;

  CodecParameters rounded = best.params.clone();
  QuantizeStats stats;
  hard_quantize_pyramid(rounded.pyramid, &stats);
  report.clamped_symbols = stats.clamped;

  say("weight-step search");
  WeightSearchResult ws = quantize_weights_search(rounded, y, config.lambda);
  result.params = std::move(ws.params);
  result.bitstream = io::serialize_bitstream(result.params, y.image_height, y.image_width, ws.exponents);
  result.reconstruction = decode_latent(result.params);

  const auto& bs = result.bitstream;
  report.step_exponents = ws.exponents;
  report.distortion = ws.distortion;
  report.file_bits = 8.0 * static_cast<double>(bs.bytes.size());
  report.bpp = io::bits_per_pixel(bs.bytes.size(), y.image_height, y.image_width);
  report.final_loss = report.distortion + config.lambda * report.bpp;
  report.grid_estimate_bits = bs.grid_estimate_bits;
  report.weight_estimate_bits = bs.weight_estimate_bits;
  report.estimate_bits = 8.0 * static_cast<double>(bs.header.size()) + bs.estimate_bits();
  for (std::size_t i = 0; i < bs.header.segment_lengths.size(); ++i) {
    const double bits = 8.0 * bs.header.segment_lengths[i];
    (i < kAllNetworks.size() ? report.weight_payload_bits : report.grid_payload_bits) += bits;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace clric::train
