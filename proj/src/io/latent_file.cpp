#include "clric/io/latent_file.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

#include "clric/error.hpp"
#include "clric/io/byte_io.hpp"

namespace clric::io {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorKind::kIo, "read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::kIo, "cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      std::remove(tmp.c_str());
      fail(ErrorKind::kIo, "write failed: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorKind::kIo, "cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

std::vector<std::uint8_t> encode_latent(const LatentTensor& latent) {
  latent.validate();
  ByteWriter w;
  w.tag("CLRT");
  w.u16(kLatentFileVersion);
  w.u8(kLatentDtypeF32);
  w.u8(0);
  w.u32(static_cast<std::uint32_t>(latent.channels));
  w.u32(static_cast<std::uint32_t>(latent.height));
  w.u32(static_cast<std::uint32_t>(latent.width));
  w.u32(static_cast<std::uint32_t>(latent.image_height));
  w.u32(static_cast<std::uint32_t>(latent.image_width));
  w.buffer().reserve(kLatentHeaderBytes + 4 * latent.values.size());
  for (float v : latent.values) w.f32(v);
  return std::move(w.buffer());
}

LatentTensor decode_latent_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  require(r.tag_is("CLRT"), ErrorKind::kBadMagic, "not a latent file");
  const auto version = r.u16();
  require(version == kLatentFileVersion, ErrorKind::kUnsupportedVersion,
          "latent file version " + std::to_string(version));
  const auto dtype = r.u8();
  require(dtype == kLatentDtypeF32, ErrorKind::kUnsupportedDtype, "latent dtype " + std::to_string(dtype));
  require(r.u8() == 0, ErrorKind::kInvalidHeader, "reserved byte must be 0");

  std::uint32_t dims[5];
  for (auto& d : dims) d = r.u32();
  constexpr auto kMax = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  for (auto d : dims) require(d >= 1 && d <= kMax, ErrorKind::kInvalidHeader, "latent file extent out of range");
  require(dims[1] <= dims[3] && dims[2] <= dims[4], ErrorKind::kInvalidHeader, "latent larger than its image");

  const std::uint64_t count = static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2];
  require(count <= r.remaining() / 4, ErrorKind::kTruncated,
          "payload needs " + std::to_string(count * 4) + " bytes, have " + std::to_string(r.remaining()));
  require(count * 4 == r.remaining(), ErrorKind::kLengthMismatch,
          std::to_string(r.remaining() - count * 4) + " trailing bytes after payload");

  LatentTensor t;
  t.channels = static_cast<int>(dims[0]);
  t.height = static_cast<int>(dims[1]);
  t.width = static_cast<int>(dims[2]);
  t.image_height = static_cast<int>(dims[3]);
  t.image_width = static_cast<int>(dims[4]);
  t.values.resize(count);
  for (auto& v : t.values) {
    v = r.f32();
    require(std::isfinite(v), ErrorKind::kNonFinite, "latent payload contains NaN or Inf");
  }
  return t;
}

void write_latent(const std::string& path, const LatentTensor& latent) { write_file(path, encode_latent(latent)); }

LatentTensor read_latent(const std::string& path) { return decode_latent_file(read_file(path)); }

}  // namespace clric::io
