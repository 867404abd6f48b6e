#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clric/entropy/range_coder.hpp"

namespace clric::entropy {

// Weights are coded as n = round(w / 2^e) under a zero-mean Laplace whose
// scale b is sent as u16 8.8 fixed point. A segment opens with
// M = max|n| (16 raw bits) and then codes every n over [-M, M].
inline constexpr int kMinStepExponent = -12;
inline constexpr int kMaxStepExponent = 0;
inline constexpr std::int32_t kMaxWeightSymbol = (kMaxCdfSymbols - 1) / 2;  // 16383
inline constexpr double kMinWeightScale = 0.1;

float step_from_exponent(int exponent);

// Throws kSymbolOutOfRange if any |n| exceeds kMaxWeightSymbol.
std::vector<std::int32_t> quantize_weights(std::span<const float> weights, int exponent);
std::vector<float> dequantize_weights(std::span<const std::int32_t> symbols, int exponent);

// round(max(mean|n|, 0.1) * 256), clamped to [1, 65535].
std::uint16_t weight_scale_code(std::span<const std::int32_t> symbols);
inline double weight_scale_value(std::uint16_t code) { return code / 256.0; }

void encode_weights(std::span<const std::int32_t> symbols, std::uint16_t scale_code, RangeEncoder& enc);
// Throws kCorruptStream if the stored max|n| is out of range.
std::vector<std::int32_t> decode_weights(std::size_t count, std::uint16_t scale_code, RangeDecoder& dec);

// 16 bits for M plus the table cost of every symbol.
double weight_estimate_bits(std::span<const std::int32_t> symbols, std::uint16_t scale_code);

}  // namespace clric::entropy
