#include "clric/model/arm.hpp"

#include <algorithm>
#include <cmath>

#include "clric/autograd/ops.hpp"

namespace clric {

Context extract_context(std::span<const float> grid, int height, int width, int row, int col) {
  Context ctx{};
  for (int j = 0; j < kArmContextSize; ++j) {
    const int r = row + kContextOffsets[j].first;
    const int c = col + kContextOffsets[j].second;
    if (r >= 0 && r < height && c >= 0 && c < width) ctx[j] = grid[static_cast<std::size_t>(r) * width + c];
  }
  return ctx;
}

namespace {

// Mirrors conv2d's accumulation order: start at the bias, add inputs in order.
template <std::size_t Out, std::size_t In>
std::array<float, Out> dense(const std::array<float, In>& x, std::span<const float> w, std::span<const float> b) {
  std::array<float, Out> y{};
  for (std::size_t o = 0; o < Out; ++o) {
    float acc = b[o];
    for (std::size_t i = 0; i < In; ++i) acc += w[o * In + i] * x[i];
    y[o] = acc;
  }
  return y;
}

}  // namespace

LaplaceParams arm_forward(const Context& context, const ArmWeights& weights) {
  auto h1 = dense<kArmHidden, kArmContextSize>(context, weights.w1.values(), weights.b1.values());
  for (auto& v : h1) v = v > 0.0f ? v : 0.0f;
  auto h2 = dense<kArmHidden, kArmHidden>(h1, weights.w2.values(), weights.b2.values());
  for (std::size_t i = 0; i < h2.size(); ++i) {
    const float v = h2[i] + h1[i];
    h2[i] = v > 0.0f ? v : 0.0f;
  }
  const auto out = dense<kArmOutputs, kArmHidden>(h2, weights.w3.values(), weights.b3.values());
  const float b = std::exp(out[1]);
  return {out[0], std::clamp(b, kMinLaplaceScale, kMaxLaplaceScale)};
}

ArmBatch arm_forward_batch(const ag::Tensor& grid, const ArmWeights& weights) {
  const ag::Tensor ctx = ag::gather_context(grid, kContextOffsets);
  const ag::Tensor h1 = ag::relu(ag::conv2d(ctx, weights.w1, weights.b1));
  const ag::Tensor h2 = ag::relu(ag::add(ag::conv2d(h1, weights.w2, weights.b2), h1));
  const ag::Tensor out = ag::conv2d(h2, weights.w3, weights.b3);
  const ag::Tensor mu = ag::slice_channel(out, 0);
  const ag::Tensor scale = ag::clamp(ag::exp(ag::slice_channel(out, 1)), kMinLaplaceScale, kMaxLaplaceScale);
  return {mu, scale};
}

double rate_bits(double value, const LaplaceParams& p) {
  const double b = p.scale;
  const double lo = value - 0.5 - p.mu, hi = value + 0.5 - p.mu;
  const double e_lo = std::exp(-std::abs(lo) / b), e_hi = std::exp(-std::abs(hi) / b);
  double prob;
  if (lo >= 0.0) {
    prob = 0.5 * (e_lo - e_hi);
  } else if (hi <= 0.0) {
    prob = 0.5 * (e_hi - e_lo);
  } else {
    prob = 1.0 - 0.5 * e_lo - 0.5 * e_hi;
  }
  return -std::log2(std::max(prob, 1.0 / 65536.0));
}

ag::Tensor grid_rate_bits(const ag::Tensor& grid, const ArmWeights& weights) {
  const ArmBatch arm = arm_forward_batch(grid, weights);
  const ag::Tensor values = ag::reshape(grid, arm.mu.shape());
  return ag::sum(ag::laplace_rate_bits(values, arm.mu, arm.scale));
}

}  // namespace clric
