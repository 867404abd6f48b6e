#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "clric/entropy/grid_coder.hpp"
#include "clric/model/parameters.hpp"

namespace clric::io {

inline constexpr std::uint16_t kBitstreamVersion = 1;
// Decoder-side allocation limits, checked before any payload is read.
inline constexpr int kMaxChannels = 1024;
inline constexpr std::uint64_t kMaxLatentValues = 1ull << 28;

// Step exponents e (step = 2^e) per network, in kAllNetworks order.
using WeightSteps = std::array<int, 3>;

struct BitstreamHeader {
  int image_height = 0;
  int image_width = 0;
  int channels = 0;
  int latent_height = 0;
  int latent_width = 0;
  ArchitectureConfig arch;
  WeightSteps step_exponents{};
  std::array<std::uint16_t, 3> weight_scales{};  // 8.8 fixed point
  std::vector<entropy::SymbolBounds> grid_bounds;  // k = 0 (finest) first
  // ARM, upsampler, synthesis, then grids k = K-1 down to 0.
  std::vector<std::uint32_t> segment_lengths;

  static std::size_t size_for(int num_grids) { return 51 + 8 * static_cast<std::size_t>(num_grids); }
  std::size_t size() const { return size_for(arch.num_grids); }
  std::uint64_t payload_size() const;
};

// 8 * file bytes / image pixels.
inline double bits_per_pixel(std::uint64_t file_bytes, int image_height, int image_width) {
  return 8.0 * static_cast<double>(file_bytes) / (static_cast<double>(image_height) * image_width);
}

struct SerializedBitstream {
  std::vector<std::uint8_t> bytes;
  BitstreamHeader header;
  double grid_estimate_bits = 0.0;    // quantized-CDF cost of all grids
  double weight_estimate_bits = 0.0;  // same for the three weight segments

  std::size_t payload_bytes() const { return bytes.size() - header.size(); }
  double estimate_bits() const { return grid_estimate_bits + weight_estimate_bits; }
};

// Rounds every network to its step: w <- round(w / 2^e) * 2^e. Throws
// kSymbolOutOfRange when a weight needs more than 15 bits at that step.
void apply_weight_steps(CodecParameters& params, const WeightSteps& exponents);

// Grids must hold integers in the i16 range. Weights are rounded to their
// steps (idempotent for parameters that went through apply_weight_steps),
// and grids are coded under the rounded ARM.
SerializedBitstream serialize_bitstream(const CodecParameters& params, int image_height, int image_width,
                                        const WeightSteps& exponents);

struct ParsedBitstream {
  BitstreamHeader header;
  CodecParameters params;  // integer grids, weights on their steps
};

// Validates the full header before touching payload.
// Errors: kBadMagic, kUnsupportedVersion, kInvalidHeader, kTruncated,
// kLengthMismatch, kSymbolOutOfRange, kCorruptStream.
ParsedBitstream parse_bitstream(std::span<const std::uint8_t> bytes);
BitstreamHeader parse_header(std::span<const std::uint8_t> bytes);

}  // namespace clric::io
