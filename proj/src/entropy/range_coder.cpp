#include "clric/entropy/range_coder.hpp"

#include <string>

#include "clric/error.hpp"

namespace clric::entropy {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
constexpr std::size_t kMaxImplicitZeros = 4;
}  // namespace

void RangeEncoder::encode(std::uint32_t cum_low, std::uint32_t freq) {
  const std::uint32_t r = range_ >> kCdfPrecisionBits;
  low_ += static_cast<std::uint64_t>(r) * cum_low;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_symbol(std::int32_t symbol, const QuantizedCdf& cdf) {
  require(cdf.contains(symbol), ErrorKind::kSymbolOutOfRange,
          "symbol " + std::to_string(symbol) + " outside [" + std::to_string(cdf.s_min()) + ", " +
              std::to_string(cdf.s_max()) + "]");
  encode(cdf.low(symbol), cdf.frequency(symbol));
}

void RangeEncoder::encode_raw(std::uint32_t value, int bits) {
  require(bits >= 1 && bits <= 16 && value < (1u << bits), ErrorKind::kSymbolOutOfRange, "raw value out of range");
  const int shift = kCdfPrecisionBits - bits;
  encode(value << shift, 1u << shift);
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t pending = cache_;
    do {
      if (!leading_) out_.push_back(static_cast<std::uint8_t>(pending + carry));
      leading_ = false;
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low_) >> 24);
  }
  ++cache_size_;
  low_ = static_cast<std::uint64_t>(static_cast<std::uint32_t>(low_) << 8);
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  low_ = (low_ + (kTop - 1)) & ~static_cast<std::uint64_t>(kTop - 1);
  for (int i = 0; i < 5; ++i) shift_low();
  std::size_t trimmed = 0;
  while (!out_.empty() && out_.back() == 0 && trimmed < kMaxImplicitZeros) {
    out_.pop_back();
    ++trimmed;
  }
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  std::uint8_t b = 0;
  if (pos_ < bytes_.size()) {
    b = bytes_[pos_];
  } else {
    require(pos_ - bytes_.size() < kMaxImplicitZeros, ErrorKind::kTruncated, "range-coded segment ended early");
  }
  ++pos_;
  window_ = (window_ << 8) | b;
  return b;
}

std::uint32_t RangeDecoder::next_value() {
  step_ = range_ >> kCdfPrecisionBits;
  const std::uint32_t value = code_ / step_;
  require(value < kCdfTotal, ErrorKind::kCorruptStream, "coded value outside the frequency table");
  return value;
}

void RangeDecoder::consume(std::uint32_t cum_low, std::uint32_t freq) {
  code_ -= step_ * cum_low;
  range_ = step_ * freq;
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::int32_t RangeDecoder::decode_symbol(const QuantizedCdf& cdf) {
  const std::int32_t symbol = cdf.symbol_for(next_value());
  consume(cdf.low(symbol), cdf.frequency(symbol));
  return symbol;
}

std::uint32_t RangeDecoder::decode_raw(int bits) {
  require(bits >= 1 && bits <= 16, ErrorKind::kConfiguration, "raw width must be 1..16 bits");
  const int shift = kCdfPrecisionBits - bits;
  const std::uint32_t value = next_value() >> shift;
  consume(value << shift, 1u << shift);
  return value;
}

void RangeDecoder::finish() const {
  require(pos_ >= bytes_.size(), ErrorKind::kCorruptStream, "unconsumed bytes after the last symbol");
  // The encoder trims up to kMaxImplicitZeros trailing zeros, so an explicit
  // trailing zero is only canonical when all of them were trimmed.
  require(pos_ - bytes_.size() == kMaxImplicitZeros || bytes_.empty() || bytes_.back() != 0,
          ErrorKind::kCorruptStream, "non-canonical trailing zero byte");
  const std::uint32_t low = window_ - code_;
  const std::uint32_t canonical =
      static_cast<std::uint32_t>((static_cast<std::uint64_t>(low) + (kTop - 1)) & ~static_cast<std::uint64_t>(kTop - 1));
  require(canonical == window_, ErrorKind::kCorruptStream, "stream does not end on its terminal value");
}

}  // namespace clric::entropy
