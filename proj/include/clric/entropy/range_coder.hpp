#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clric/entropy/quantized_cdf.hpp"

namespace clric::entropy {

// 32-bit range coder over 2^16-total frequency tables. The 64-bit low
// register absorbs carries, which are resolved through a cached byte and a
// run of pending 0xFF bytes. Renormalization is byte-wise.
//
// Termination: the final value is `low` rounded up to a multiple of 2^24,
// which still lies inside the last interval. Trailing zero bytes are then
// dropped; the decoder reads them back as implicit zeros. The decoder
// checks that the stream ends with exactly this canonical value, so any
// altered byte either changes a decoded symbol or fails finish().
class RangeEncoder {
 public:
  void encode(std::uint32_t cum_low, std::uint32_t freq);
  void encode_symbol(std::int32_t symbol, const QuantizedCdf& cdf);
  // Up to 16 raw bits, each value equally likely.
  void encode_raw(std::uint32_t value, int bits);

  // Flushes and returns the coded bytes. The encoder is spent afterwards.
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool leading_ = true;  // the first cached byte is always 0 and never written
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  // Throws kCorruptStream when the stream points outside the table.
  std::int32_t decode_symbol(const QuantizedCdf& cdf);
  std::uint32_t decode_raw(int bits);

  // Verifies that every byte was consumed and the stream ended on the
  // canonical terminal value. Throws kCorruptStream otherwise.
  void finish() const;

 private:
  std::uint32_t next_value();
  void consume(std::uint32_t cum_low, std::uint32_t freq);
  std::uint8_t next_byte();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;  // may run past the end by the trimmed zero bytes
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
  std::uint32_t window_ = 0;  // last four bytes read
  std::uint32_t step_ = 0;    // range >> 16 for the symbol in flight
};

}  // namespace clric::entropy
