#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clric/model/latent_tensor.hpp"

namespace clric::io {

// "CLRT" | version u16 | dtype u8 | reserved u8 | C, H, W, image_h, image_w u32
// | C*H*W f32, all little-endian.
inline constexpr std::uint16_t kLatentFileVersion = 1;
inline constexpr std::uint8_t kLatentDtypeF32 = 0;
inline constexpr std::size_t kLatentHeaderBytes = 28;

std::vector<std::uint8_t> encode_latent(const LatentTensor& latent);
// Errors: kBadMagic, kUnsupportedVersion, kUnsupportedDtype, kInvalidHeader,
// kTruncated, kLengthMismatch (trailing bytes), kNonFinite.
LatentTensor decode_latent_file(std::span<const std::uint8_t> bytes);

void write_latent(const std::string& path, const LatentTensor& latent);
LatentTensor read_latent(const std::string& path);

}  // namespace clric::io
