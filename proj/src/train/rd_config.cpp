#include "clric/train/rd_config.hpp"

#include <cmath>
#include <numbers>

#include "clric/error.hpp"

namespace clric::train {

void RdConfig::validate() const {
  arch.validate();
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::kConfiguration, "lambda must be finite and >= 0");
  require(warmup_candidates >= 1 && warmup_iters >= 0, ErrorKind::kConfiguration,
          "need at least one warm-up candidate");
  require(finalist_count >= 1 && finalist_count <= warmup_candidates && finalist_iters >= 0,
          ErrorKind::kConfiguration, "finalist count must be in [1, warmup_candidates]");
  require(main_iters >= 1, ErrorKind::kConfiguration, "main phase needs at least one iteration");
  require(hard_quant_tail >= 0 && hard_quant_tail <= main_iters, ErrorKind::kConfiguration,
          "hard-quantization tail must fit in the main phase");
  require(initial_lr > 0.0f && final_lr > 0.0f && final_lr <= initial_lr, ErrorKind::kConfiguration,
          "learning rates must satisfy 0 < final_lr <= initial_lr");
  require(threads >= 1, ErrorKind::kConfiguration, "threads must be >= 1");
  require(scheduled_steps() == total_iterations, ErrorKind::kConfiguration,
          "candidates*warmup + finalists*finalist_iters + main = " + std::to_string(scheduled_steps()) +
              ", total_iterations = " + std::to_string(total_iterations));
}

std::int64_t RdConfig::scheduled_steps() const {
  return static_cast<std::int64_t>(warmup_candidates) * warmup_iters +
         static_cast<std::int64_t>(finalist_count) * finalist_iters + main_iters;
}

RdConfig paper_preset() { return RdConfig{}; }

RdConfig smoke_preset() {
  RdConfig c;
  c.warmup_candidates = 2;
  c.warmup_iters = 50;
  c.finalist_count = 1;
  c.finalist_iters = 50;
  c.main_iters = 400;
  c.hard_quant_tail = 100;
  c.total_iterations = static_cast<int>(c.scheduled_steps());
  return c;
}

RdConfig preset_by_name(const std::string& name) {
  if (name == "paper") return paper_preset();
  if (name == "smoke") return smoke_preset();
  fail(ErrorKind::kUsage, "unknown preset '" + name + "' (expected paper or smoke)");
}

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::kWarmup: return "warmup";
    case Phase::kFinalist: return "finalist";
    case Phase::kMain: return "main";
  }
  return "?";
}

float lr_schedule(Phase phase, int iteration, const RdConfig& config) {
  if (phase != Phase::kMain) return config.initial_lr;
  if (config.main_iters <= 1) return config.initial_lr;
  const double t = static_cast<double>(iteration) / (config.main_iters - 1);
  const double lo = config.final_lr, hi = config.initial_lr;
  return static_cast<float>(lo + 0.5 * (hi - lo) * (1.0 + std::cos(std::numbers::pi * t)));
}

}  // namespace clric::train
