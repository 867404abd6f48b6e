#include "clric/model/parameters.hpp"

#include <cmath>
#include <string>

#include "clric/error.hpp"
#include "clric/model/pyramid.hpp"
#include "clric/model/upsampler.hpp"

namespace clric {

void ArchitectureConfig::validate() const {
  require(id == kDefaultArchitectureId, ErrorKind::kConfiguration, "unknown architecture id " + std::to_string(id));
  require(num_grids >= 1 && num_grids <= 16, ErrorKind::kConfiguration, "grid count must be in [1, 16]");
  require(synthesis_hidden >= 1 && synthesis_hidden <= 1024, ErrorKind::kConfiguration,
          "synthesis hidden width must be in [1, 1024]");
}

const char* network_name(Network network) {
  switch (network) {
    case Network::kArm: return "arm";
    case Network::kUpsampler: return "upsampler";
    case Network::kSynthesis: return "synthesis";
  }
  return "?";
}

std::size_t GridPyramid::coefficient_count() const {
  std::size_t n = 0;
  for (const auto& g : grids) n += g.numel();
  return n;
}

namespace {

std::vector<ag::Tensor> clone_all(const std::vector<ag::Tensor>& ts) {
  std::vector<ag::Tensor> out;
  for (const auto& t : ts) out.push_back(t.clone());
  return out;
}

ag::Tensor uniform_weight(ag::Shape shape, Rng& rng) {
  const int receptive = shape.size() == 4 ? shape[2] * shape[3] : 1;
  const double fan_in = static_cast<double>(shape[1]) * receptive;
  const double fan_out = static_cast<double>(shape[0]) * receptive;
  const float bound = static_cast<float>(std::sqrt(6.0 / (fan_in + fan_out)));
  std::vector<float> v(ag::element_count(shape));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return ag::Tensor::from(std::move(shape), std::move(v), true);
}

void expect_shape(const ag::Tensor& t, const ag::Shape& shape, const char* what) {
  require(t.defined() && t.shape() == shape, ErrorKind::kConfiguration,
          std::string(what) + ": expected shape " + ag::shape_string(shape) +
              (t.defined() ? ", got " + ag::shape_string(t.shape()) : ", got undefined"));
}

}  // namespace

CodecParameters CodecParameters::clone() const {
  CodecParameters out;
  out.arch = arch;
  out.channels = channels;
  out.height = height;
  out.width = width;
  out.pyramid.grids = clone_all(pyramid.grids);
  auto a = clone_all(arm.tensors());
  out.arm = {a[0], a[1], a[2], a[3], a[4], a[5]};
  out.upsampler.kernel = upsampler.kernel.clone();
  auto s = clone_all(synthesis.tensors());
  out.synthesis = {s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]};
  return out;
}

std::vector<ag::Tensor> CodecParameters::trainable() const {
  std::vector<ag::Tensor> out = pyramid.grids;
  for (Network n : kAllNetworks) {
    for (auto& t : network_tensors(n)) out.push_back(t);
  }
  return out;
}

std::vector<ag::Tensor> CodecParameters::network_tensors(Network network) const {
  switch (network) {
    case Network::kArm: return arm.tensors();
    case Network::kUpsampler: return upsampler.tensors();
    case Network::kSynthesis: return synthesis.tensors();
  }
  return {};
}

void CodecParameters::validate() const {
  arch.validate();
  require(channels >= 1 && height >= 1 && width >= 1, ErrorKind::kConfiguration, "latent extents must be >= 1");
  require(pyramid.levels() == arch.num_grids, ErrorKind::kConfiguration, "pyramid level count mismatch");
  const auto shapes = pyramid_shapes(height, width, arch.num_grids);
  for (int k = 0; k < arch.num_grids; ++k) {
    expect_shape(pyramid.grids[k], {1, shapes[k].height, shapes[k].width}, "grid");
  }
  const int h = arch.synthesis_hidden, K = arch.num_grids, C = channels;
  expect_shape(arm.w1, {kArmHidden, kArmContextSize, 1, 1}, "arm.w1");
  expect_shape(arm.b1, {kArmHidden}, "arm.b1");
  expect_shape(arm.w2, {kArmHidden, kArmHidden, 1, 1}, "arm.w2");
  expect_shape(arm.b2, {kArmHidden}, "arm.b2");
  expect_shape(arm.w3, {kArmOutputs, kArmHidden, 1, 1}, "arm.w3");
  expect_shape(arm.b3, {kArmOutputs}, "arm.b3");
  expect_shape(upsampler.kernel, {kUpsamplerTaps, kUpsamplerTaps}, "upsampler.kernel");
  expect_shape(synthesis.w1, {h, K, 1, 1}, "synthesis.w1");
  expect_shape(synthesis.b1, {h}, "synthesis.b1");
  expect_shape(synthesis.w2, {h, h, 1, 1}, "synthesis.w2");
  expect_shape(synthesis.b2, {h}, "synthesis.b2");
  expect_shape(synthesis.w3, {C, h, 3, 3}, "synthesis.w3");
  expect_shape(synthesis.b3, {C}, "synthesis.b3");
  expect_shape(synthesis.w4, {C, C, 3, 3}, "synthesis.w4");
  expect_shape(synthesis.b4, {C}, "synthesis.b4");
}

std::size_t network_parameter_count(const ArchitectureConfig& arch, int channels, Network network) {
  const std::size_t h = arch.synthesis_hidden, K = arch.num_grids, C = channels;
  switch (network) {
    case Network::kArm:
      return kArmHidden * kArmContextSize + kArmHidden + kArmHidden * kArmHidden + kArmHidden +
             kArmOutputs * kArmHidden + kArmOutputs;
    case Network::kUpsampler: return kUpsamplerTaps * kUpsamplerTaps;
    case Network::kSynthesis: return h * K + h + h * h + h + C * h * 9 + C + C * C * 9 + C;
  }
  return 0;
}

std::vector<float> flatten_network(const CodecParameters& params, Network network) {
  std::vector<float> flat;
  for (const auto& t : params.network_tensors(network)) flat.insert(flat.end(), t.values().begin(), t.values().end());
  return flat;
}

void assign_network(CodecParameters& params, Network network, std::span<const float> flat) {
  auto tensors = params.network_tensors(network);
  std::size_t total = 0;
  for (const auto& t : tensors) total += t.numel();
  require(flat.size() == total, ErrorKind::kConfiguration,
          std::string("assign_network: ") + network_name(network) + " expects " + std::to_string(total) + " values");
  std::size_t offset = 0;
  for (auto& t : tensors) {
    auto dst = t.mutable_values();
    std::copy(flat.begin() + offset, flat.begin() + offset + dst.size(), dst.begin());
    offset += dst.size();
  }
}

CodecParameters init_codec_parameters(const ArchitectureConfig& arch, int channels, int height, int width,
                                      std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  CodecParameters p;
  p.arch = arch;
  p.channels = channels;
  p.height = height;
  p.width = width;
  p.pyramid = init_pyramid(height, width, arch.num_grids);

  p.arm.w1 = uniform_weight({kArmHidden, kArmContextSize, 1, 1}, rng);
  p.arm.b1 = ag::Tensor::zeros({kArmHidden}, true);
  p.arm.w2 = uniform_weight({kArmHidden, kArmHidden, 1, 1}, rng);
  p.arm.b2 = ag::Tensor::zeros({kArmHidden}, true);
  p.arm.w3 = uniform_weight({kArmOutputs, kArmHidden, 1, 1}, rng);
  p.arm.b3 = ag::Tensor::zeros({kArmOutputs}, true);

  p.upsampler.kernel = bicubic_kernel();
  p.upsampler.kernel.set_requires_grad(true);

  const int h = arch.synthesis_hidden, K = arch.num_grids, C = channels;
  p.synthesis.w1 = uniform_weight({h, K, 1, 1}, rng);
  p.synthesis.b1 = ag::Tensor::zeros({h}, true);
  p.synthesis.w2 = uniform_weight({h, h, 1, 1}, rng);
  p.synthesis.b2 = ag::Tensor::zeros({h}, true);
  p.synthesis.w3 = uniform_weight({C, h, 3, 3}, rng);
  p.synthesis.b3 = ag::Tensor::zeros({C}, true);
  p.synthesis.w4 = uniform_weight({C, C, 3, 3}, rng);
  p.synthesis.b4 = ag::Tensor::zeros({C}, true);
  p.validate();
  return p;
}

CodecParameters zero_codec_parameters(const ArchitectureConfig& arch, int channels, int height, int width) {
  CodecParameters p = init_codec_parameters(arch, channels, height, width, 0);
  for (Network n : kAllNetworks) {
    for (auto& t : p.network_tensors(n)) {
      auto v = t.mutable_values();
      std::fill(v.begin(), v.end(), 0.0f);
    }
  }
  return p;
}

}  // namespace clric
