#include "clric/entropy/quantized_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clric/error.hpp"

namespace clric::entropy {

namespace {

void check_range(std::int32_t s_min, std::int32_t s_max) {
  require(s_min <= s_max, ErrorKind::kConfiguration,
          "empty symbol range [" + std::to_string(s_min) + ", " + std::to_string(s_max) + "]");
  require(static_cast<std::int64_t>(s_max) - s_min + 1 <= kMaxCdfSymbols, ErrorKind::kConfiguration,
          "symbol range wider than 2^15");
}

// Laplace CDF difference over [n - 1/2, n + 1/2].
double bin_mass(double n, double mu, double b) {
  const double lo = n - 0.5 - mu, hi = n + 0.5 - mu;
  if (lo >= 0.0) return 0.5 * (std::exp(-lo / b) - std::exp(-hi / b));
  if (hi <= 0.0) return 0.5 * (std::exp(hi / b) - std::exp(lo / b));
  return 1.0 - 0.5 * std::exp(lo / b) - 0.5 * std::exp(-hi / b);
}

QuantizedCdf from_masses(std::int32_t s_min, std::int32_t s_max, const std::vector<double>& mass,
                         std::int32_t fallback) {
  const std::size_t n = mass.size();
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  const std::uint32_t spare = kCdfTotal - static_cast<std::uint32_t>(n);
  std::vector<std::uint32_t> freq(n, 1);
  if (!(total > 0.0)) {
    freq[fallback - s_min] += spare;
  } else {
    std::vector<double> remainder(n);
    std::uint32_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ideal = mass[i] / total * spare;
      const double whole = std::floor(ideal);
      freq[i] += static_cast<std::uint32_t>(whole);
      used += static_cast<std::uint32_t>(whole);
      remainder[i] = ideal - whole;
    }
    std::uint32_t left = spare - used;
    if (left > 0) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      auto by_remainder = [&](std::size_t a, std::size_t b) {
        return remainder[a] != remainder[b] ? remainder[a] > remainder[b] : a < b;
      };
      std::partial_sort(order.begin(), order.begin() + std::min<std::size_t>(left, n), order.end(), by_remainder);
      // `left` < n because each floor loses less than one count.
      for (std::uint32_t i = 0; i < left; ++i) ++freq[order[i]];
    }
  }
  std::vector<std::uint32_t> cum(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + freq[i];
  return QuantizedCdf(s_min, s_max, std::move(cum));
}

}  // namespace

QuantizedCdf::QuantizedCdf(std::int32_t s_min, std::int32_t s_max, std::vector<std::uint32_t> cumulative)
    : s_min_(s_min), s_max_(s_max), cumulative_(std::move(cumulative)) {
  check_range(s_min, s_max);
  require(cumulative_.size() == static_cast<std::size_t>(s_max - s_min) + 2, ErrorKind::kConfiguration,
          "cumulative table size does not match symbol range");
  require(cumulative_.front() == 0 && cumulative_.back() == kCdfTotal, ErrorKind::kConfiguration,
          "cumulative table must run from 0 to 2^16");
  for (std::size_t i = 1; i < cumulative_.size(); ++i) {
    require(cumulative_[i] > cumulative_[i - 1], ErrorKind::kConfiguration, "cumulative table must be strictly increasing");
  }
}

std::int32_t QuantizedCdf::symbol_for(std::uint32_t value) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), value);
  return s_min_ + static_cast<std::int32_t>(it - cumulative_.begin()) - 1;
}

double QuantizedCdf::bits(std::int32_t symbol) const {
  return kCdfPrecisionBits - std::log2(static_cast<double>(frequency(symbol)));
}

QuantizedCdf quantize_cdf(const LaplaceParams& p, std::int32_t s_min, std::int32_t s_max) {
  check_range(s_min, s_max);
  std::vector<double> mass(static_cast<std::size_t>(s_max - s_min) + 1);
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = bin_mass(static_cast<double>(s_min) + i, p.mu, p.scale);
  const double nearest = std::clamp(std::round(static_cast<double>(p.mu)), static_cast<double>(s_min),
                                    static_cast<double>(s_max));
  return from_masses(s_min, s_max, mass, static_cast<std::int32_t>(nearest));
}

QuantizedCdf uniform_cdf(std::int32_t s_min, std::int32_t s_max) {
  check_range(s_min, s_max);
  return from_masses(s_min, s_max, std::vector<double>(static_cast<std::size_t>(s_max - s_min) + 1, 1.0), s_min);
}

}  // namespace clric::entropy
