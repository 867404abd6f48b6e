#include "clric/entropy/weight_coder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "clric/error.hpp"
#include "clric/model/arm.hpp"

namespace clric::entropy {

namespace {

constexpr int kMaxBits = 16;

std::int32_t max_abs(std::span<const std::int32_t> symbols) {
  std::int32_t m = 0;
  for (auto n : symbols) m = std::max(m, std::abs(n));
  return m;
}

QuantizedCdf weight_cdf(std::int32_t max_symbol, std::uint16_t scale_code) {
  require(scale_code >= 1, ErrorKind::kConfiguration, "weight scale code must be >= 1");
  return quantize_cdf({0.0f, static_cast<float>(weight_scale_value(scale_code))}, -max_symbol, max_symbol);
}

}  // namespace

float step_from_exponent(int exponent) {
  require(exponent >= kMinStepExponent && exponent <= kMaxStepExponent, ErrorKind::kConfiguration,
          "step exponent " + std::to_string(exponent) + " outside [-12, 0]");
  return std::ldexp(1.0f, exponent);
}

std::vector<std::int32_t> quantize_weights(std::span<const float> weights, int exponent) {
  const float step = step_from_exponent(exponent);
  std::vector<std::int32_t> out;
  out.reserve(weights.size());
  for (float w : weights) {
    const float n = std::round(w / step);
    require(std::abs(n) <= static_cast<float>(kMaxWeightSymbol), ErrorKind::kSymbolOutOfRange,
            "weight " + std::to_string(w) + " needs more than 15 bits at step 2^" + std::to_string(exponent));
    out.push_back(static_cast<std::int32_t>(n));
  }
  return out;
}

std::vector<float> dequantize_weights(std::span<const std::int32_t> symbols, int exponent) {
  const float step = step_from_exponent(exponent);
  std::vector<float> out;
  out.reserve(symbols.size());
  for (auto n : symbols) out.push_back(static_cast<float>(n) * step);
  return out;
}

std::uint16_t weight_scale_code(std::span<const std::int32_t> symbols) {
  double mean = 0.0;
  for (auto n : symbols) mean += std::abs(n);
  if (!symbols.empty()) mean /= static_cast<double>(symbols.size());
  const double b = std::max(mean, kMinWeightScale);
  return static_cast<std::uint16_t>(std::clamp(std::round(b * 256.0), 1.0, 65535.0));
}

void encode_weights(std::span<const std::int32_t> symbols, std::uint16_t scale_code, RangeEncoder& enc) {
  const std::int32_t m = max_abs(symbols);
  require(m <= kMaxWeightSymbol, ErrorKind::kSymbolOutOfRange, "weight symbol exceeds 16383");
  enc.encode_raw(static_cast<std::uint32_t>(m), kMaxBits);
  if (m == 0) return;
  const QuantizedCdf cdf = weight_cdf(m, scale_code);
  for (auto n : symbols) enc.encode_symbol(n, cdf);
}

std::vector<std::int32_t> decode_weights(std::size_t count, std::uint16_t scale_code, RangeDecoder& dec) {
  const auto m = static_cast<std::int32_t>(dec.decode_raw(kMaxBits));
  require(m <= kMaxWeightSymbol, ErrorKind::kCorruptStream, "stored weight range exceeds 16383");
  std::vector<std::int32_t> out(count, 0);
  if (m == 0) return out;
  const QuantizedCdf cdf = weight_cdf(m, scale_code);
  for (auto& n : out) n = dec.decode_symbol(cdf);
  return out;
}

double weight_estimate_bits(std::span<const std::int32_t> symbols, std::uint16_t scale_code) {
  const std::int32_t m = max_abs(symbols);
  double bits = kMaxBits;
  if (m == 0) return bits;
  const QuantizedCdf cdf = weight_cdf(m, scale_code);
  for (auto n : symbols) bits += cdf.bits(n);
  return bits;
}

}  // namespace clric::entropy
