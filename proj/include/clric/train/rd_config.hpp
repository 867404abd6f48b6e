#pragma once

#include <cstdint>
#include <string>

#include "clric/model/parameters.hpp"

namespace clric::train {

struct RdConfig {
  double lambda = 0.0;
  int total_iterations = 15900;
  int warmup_candidates = 5;
  int warmup_iters = 400;
  int finalist_count = 2;
  int finalist_iters = 400;
  int main_iters = 13100;
  float initial_lr = 1e-2f;
  float final_lr = 1e-5f;
  int hard_quant_tail = 600;  // last main iterations run with rounded grids
  std::uint64_t seed = 0;
  int threads = 1;  // candidates trained concurrently; results do not depend on it
  ArchitectureConfig arch;

  // Checks the iteration identity, lambda >= 0 and every range. Throws
  // kConfiguration.
  void validate() const;
  std::int64_t scheduled_steps() const;
};

// 5x400 warm-up, 2x400 finalists, 13,100 main.
RdConfig paper_preset();
// 2x50 warm-up, 1x50 finalist, 400 main, 100 hard-quantization steps.
RdConfig smoke_preset();
// "paper" or "smoke"; anything else is kUsage.
RdConfig preset_by_name(const std::string& name);

enum class Phase { kWarmup, kFinalist, kMain };
const char* phase_name(Phase phase);

// Constant initial_lr outside the main phase. In the main phase, cosine
// decay from initial_lr at iteration 0 to final_lr at main_iters - 1.
float lr_schedule(Phase phase, int iteration, const RdConfig& config);

}  // namespace clric::train
