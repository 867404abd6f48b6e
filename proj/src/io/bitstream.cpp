#include "clric/io/bitstream.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "clric/entropy/weight_coder.hpp"
#include "clric/error.hpp"
#include "clric/io/byte_io.hpp"
#include "clric/model/pyramid.hpp"

namespace clric::io {

namespace {

constexpr std::size_t kNumNetworks = kAllNetworks.size();

std::size_t grid_segment(int num_grids, int k) { return kNumNetworks + static_cast<std::size_t>(num_grids - 1 - k); }

void invalid(bool ok, const std::string& what) { require(ok, ErrorKind::kInvalidHeader, what); }

int to_int(std::uint32_t v, const char* field) {
  invalid(v >= 1 && v <= static_cast<std::uint32_t>(std::numeric_limits<int>::max()),
          std::string(field) + " out of range");
  return static_cast<int>(v);
}

void validate_header(const BitstreamHeader& h) {
  invalid(h.arch.id == kDefaultArchitectureId, "unknown architecture id " + std::to_string(h.arch.id));
  invalid(h.arch.num_grids >= 1 && h.arch.num_grids <= 16, "grid count must be in [1, 16]");
  invalid(h.arch.synthesis_hidden >= 1 && h.arch.synthesis_hidden <= 1024, "synthesis width out of range");
  invalid(h.channels <= kMaxChannels, "too many channels");
  invalid(h.latent_height <= h.image_height && h.latent_width <= h.image_width, "latent larger than image");
  invalid(static_cast<std::uint64_t>(h.channels) * h.latent_height * h.latent_width <= kMaxLatentValues,
          "latent too large");
  for (int e : h.step_exponents) {
    invalid(e >= entropy::kMinStepExponent && e <= entropy::kMaxStepExponent,
            "weight step exponent " + std::to_string(e) + " outside [-12, 0]");
  }
  for (auto s : h.weight_scales) invalid(s >= 1, "weight scale must be positive");
  invalid(h.grid_bounds.size() == static_cast<std::size_t>(h.arch.num_grids), "grid bound count differs from K");
  for (const auto& b : h.grid_bounds) {
    invalid(b.min <= b.max, "grid bounds min > max");
    invalid(b.width() <= entropy::kMaxCdfSymbols, "grid bounds wider than 2^15");
  }
  invalid(h.segment_lengths.size() == kNumNetworks + h.grid_bounds.size(), "segment count differs from 3 + K");
}

void write_header(ByteWriter& w, const BitstreamHeader& h) {
  w.tag("CLRC");
  w.u16(kBitstreamVersion);
  w.u32(static_cast<std::uint32_t>(h.image_height));
  w.u32(static_cast<std::uint32_t>(h.image_width));
  w.u32(static_cast<std::uint32_t>(h.channels));
  w.u32(static_cast<std::uint32_t>(h.latent_height));
  w.u32(static_cast<std::uint32_t>(h.latent_width));
  w.u8(static_cast<std::uint8_t>(h.arch.num_grids));
  w.u8(h.arch.id);
  w.u16(static_cast<std::uint16_t>(h.arch.synthesis_hidden));
  for (int e : h.step_exponents) w.i8(static_cast<std::int8_t>(e));
  for (auto s : h.weight_scales) w.u16(s);
  for (const auto& b : h.grid_bounds) {
    w.i16(static_cast<std::int16_t>(b.min));
    w.i16(static_cast<std::int16_t>(b.max));
  }
  for (auto len : h.segment_lengths) w.u32(len);
}

}  // namespace

std::uint64_t BitstreamHeader::payload_size() const {
  return std::accumulate(segment_lengths.begin(), segment_lengths.end(), std::uint64_t{0});
}

void apply_weight_steps(CodecParameters& params, const WeightSteps& exponents) {
  for (std::size_t i = 0; i < kNumNetworks; ++i) {
    const Network net = kAllNetworks[i];
    const auto symbols = entropy::quantize_weights(flatten_network(params, net), exponents[i]);
    assign_network(params, net, entropy::dequantize_weights(symbols, exponents[i]));
  }
}

SerializedBitstream serialize_bitstream(const CodecParameters& params, int image_height, int image_width,
                                        const WeightSteps& exponents) {
  params.validate();
  for (const auto& g : params.pyramid.grids) {
    for (float v : g.values()) {
      require(v == std::round(v), ErrorKind::kConfiguration, "grids must be integer before coding");
      require(v >= kSymbolMin && v <= kSymbolMax, ErrorKind::kSymbolOutOfRange, "grid value outside the i16 range");
    }
  }

  SerializedBitstream out;
  BitstreamHeader& h = out.header;
  h.image_height = image_height;
  h.image_width = image_width;
  h.channels = params.channels;
  h.latent_height = params.height;
  h.latent_width = params.width;
  h.arch = params.arch;
  h.step_exponents = exponents;
  require(image_height >= 1 && image_width >= 1, ErrorKind::kConfiguration, "image extents must be >= 1");

  const int K = params.arch.num_grids;
  std::vector<std::vector<std::uint8_t>> segments(kNumNetworks + K);

  CodecParameters coded = params.clone();
  for (std::size_t i = 0; i < kNumNetworks; ++i) {
    const Network net = kAllNetworks[i];
    const auto symbols = entropy::quantize_weights(flatten_network(params, net), exponents[i]);
    h.weight_scales[i] = entropy::weight_scale_code(symbols);
    entropy::RangeEncoder enc;
    entropy::encode_weights(symbols, h.weight_scales[i], enc);
    segments[i] = enc.finish();
    out.weight_estimate_bits += entropy::weight_estimate_bits(symbols, h.weight_scales[i]);
    assign_network(coded, net, entropy::dequantize_weights(symbols, exponents[i]));
  }

  h.grid_bounds.resize(K);
  for (int k = K - 1; k >= 0; --k) {
    QuantizeStats stats;
    const IntGrid grid = quantize_round(params.pyramid.grids[k], &stats);
    require(stats.clamped == 0, ErrorKind::kSymbolOutOfRange, "grid " + std::to_string(k) + " exceeds the i16 range");
    h.grid_bounds[k] = entropy::grid_bounds(grid);
    entropy::RangeEncoder enc;
    entropy::encode_grid(grid, h.grid_bounds[k], coded.arm, enc);
    segments[grid_segment(K, k)] = enc.finish();
    out.grid_estimate_bits += entropy::grid_estimate_bits(grid, h.grid_bounds[k], coded.arm);
  }

  for (const auto& s : segments) h.segment_lengths.push_back(static_cast<std::uint32_t>(s.size()));
  validate_header(h);

  ByteWriter w;
  write_header(w, h);
  for (const auto& s : segments) w.bytes(s);
  out.bytes = std::move(w.buffer());
  return out;
}

BitstreamHeader parse_header(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  require(r.tag_is("CLRC"), ErrorKind::kBadMagic, "not a CLRC bitstream");
  const auto version = r.u16();
  require(version == kBitstreamVersion, ErrorKind::kUnsupportedVersion, "bitstream version " + std::to_string(version));

  BitstreamHeader h;
  h.image_height = to_int(r.u32(), "image height");
  h.image_width = to_int(r.u32(), "image width");
  h.channels = to_int(r.u32(), "channel count");
  h.latent_height = to_int(r.u32(), "latent height");
  h.latent_width = to_int(r.u32(), "latent width");
  h.arch.num_grids = r.u8();
  h.arch.id = r.u8();
  h.arch.synthesis_hidden = r.u16();
  for (auto& e : h.step_exponents) e = r.i8();
  for (auto& s : h.weight_scales) s = r.u16();
  invalid(h.arch.num_grids >= 1 && h.arch.num_grids <= 16, "grid count must be in [1, 16]");
  h.grid_bounds.resize(h.arch.num_grids);
  for (auto& b : h.grid_bounds) {
    b.min = r.i16();
    b.max = r.i16();
  }
  h.segment_lengths.resize(kNumNetworks + h.arch.num_grids);
  for (auto& len : h.segment_lengths) len = r.u32();
  validate_header(h);

  const std::uint64_t payload = h.payload_size();
  require(payload <= r.remaining(), ErrorKind::kTruncated,
          "segments need " + std::to_string(payload) + " bytes, have " + std::to_string(r.remaining()));
  require(payload == r.remaining(), ErrorKind::kLengthMismatch,
          std::to_string(r.remaining() - payload) + " trailing bytes after the last segment");
  return h;
}

ParsedBitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  ParsedBitstream out;
  out.header = parse_header(bytes);
  const BitstreamHeader& h = out.header;
  const int K = h.arch.num_grids;

  std::vector<std::span<const std::uint8_t>> segments;
  std::size_t offset = h.size();
  for (auto len : h.segment_lengths) {
    segments.push_back(bytes.subspan(offset, len));
    offset += len;
  }

  CodecParameters p = zero_codec_parameters(h.arch, h.channels, h.latent_height, h.latent_width);
  for (std::size_t i = 0; i < kNumNetworks; ++i) {
    const Network net = kAllNetworks[i];
    entropy::RangeDecoder dec(segments[i]);
    const auto symbols =
        entropy::decode_weights(network_parameter_count(h.arch, h.channels, net), h.weight_scales[i], dec);
    dec.finish();
    assign_network(p, net, entropy::dequantize_weights(symbols, h.step_exponents[i]));
  }
  for (int k = K - 1; k >= 0; --k) {
    auto& grid = p.pyramid.grids[k];
    entropy::RangeDecoder dec(segments[grid_segment(K, k)]);
    const IntGrid g = entropy::decode_grid(grid.dim(1), grid.dim(2), h.grid_bounds[k], p.arm, dec);
    dec.finish();
    grid = int_grid_tensor(g, true);
  }
  out.params = std::move(p);
  return out;
}

}  // namespace clric::io
