#pragma once

#include <cstdint>
#include <vector>

#include "clric/model/arm.hpp"

namespace clric::entropy {

inline constexpr int kCdfPrecisionBits = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecisionBits;
inline constexpr std::int32_t kMaxCdfSymbols = 1 << 15;

// Integer cumulative frequency table over [s_min, s_max] summing to 2^16.
// Every symbol has frequency >= 1.
class QuantizedCdf {
 public:
  QuantizedCdf(std::int32_t s_min, std::int32_t s_max, std::vector<std::uint32_t> cumulative);

  std::int32_t s_min() const { return s_min_; }
  std::int32_t s_max() const { return s_max_; }
  std::size_t size() const { return cumulative_.size() - 1; }
  const std::vector<std::uint32_t>& cumulative() const { return cumulative_; }

  bool contains(std::int32_t symbol) const { return symbol >= s_min_ && symbol <= s_max_; }
  std::uint32_t low(std::int32_t symbol) const { return cumulative_[symbol - s_min_]; }
  std::uint32_t frequency(std::int32_t symbol) const {
    return cumulative_[symbol - s_min_ + 1] - cumulative_[symbol - s_min_];
  }
  // Symbol whose interval holds `value` (< 2^16).
  std::int32_t symbol_for(std::uint32_t value) const;
  // Ideal code length of `symbol` under this table.
  double bits(std::int32_t symbol) const;

 private:
  std::int32_t s_min_;
  std::int32_t s_max_;
  std::vector<std::uint32_t> cumulative_;
};

// Laplace(mu, b) masses on unit bins around each integer of [s_min, s_max],
// each symbol floored at one count, the rest apportioned by largest
// remainder (ties to the lower symbol). Deterministic.
QuantizedCdf quantize_cdf(const LaplaceParams& p, std::int32_t s_min, std::int32_t s_max);

QuantizedCdf uniform_cdf(std::int32_t s_min, std::int32_t s_max);

}  // namespace clric::entropy
