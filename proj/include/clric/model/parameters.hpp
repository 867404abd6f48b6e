#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "clric/autograd/tensor.hpp"
#include "clric/rng.hpp"

namespace clric {

inline constexpr int kArmContextSize = 8;
inline constexpr int kArmHidden = 8;
inline constexpr int kArmOutputs = 2;
inline constexpr int kUpsamplerTaps = 8;

// Architecture id 1: Laplace entropy model, 8-neighbour ARM 8-8-2 with a
// residual on the second layer, shared 8x8 transposed-conv upsampler,
// synthesis [1x1, 1x1 (+res), 3x3, 3x3 (+res)].
inline constexpr std::uint8_t kDefaultArchitectureId = 1;

struct ArchitectureConfig {
  int num_grids = 7;
  int synthesis_hidden = 16;
  std::uint8_t id = kDefaultArchitectureId;

  void validate() const;
  friend bool operator==(const ArchitectureConfig&, const ArchitectureConfig&) = default;
};

enum class Network : int { kArm = 0, kUpsampler = 1, kSynthesis = 2 };
inline constexpr std::array<Network, 3> kAllNetworks = {Network::kArm, Network::kUpsampler, Network::kSynthesis};
const char* network_name(Network network);

// (1,h,w) per grid, finest (k = 0) first.
struct GridPyramid {
  std::vector<ag::Tensor> grids;

  int levels() const { return static_cast<int>(grids.size()); }
  std::size_t coefficient_count() const;
};

// Three 1x1 "conv" layers over a (8,1,N) batch of contexts.
struct ArmWeights {
  ag::Tensor w1, b1;  // (8,8,1,1), (8)
  ag::Tensor w2, b2;  // (8,8,1,1), (8)
  ag::Tensor w3, b3;  // (2,8,1,1), (2)

  std::vector<ag::Tensor> tensors() const { return {w1, b1, w2, b2, w3, b3}; }
};

struct UpsamplerKernel {
  ag::Tensor kernel;  // (8,8)

  std::vector<ag::Tensor> tensors() const { return {kernel}; }
};

struct SynthesisWeights {
  ag::Tensor w1, b1;  // (hidden,K,1,1)
  ag::Tensor w2, b2;  // (hidden,hidden,1,1)
  ag::Tensor w3, b3;  // (C,hidden,3,3)
  ag::Tensor w4, b4;  // (C,C,3,3)

  std::vector<ag::Tensor> tensors() const { return {w1, b1, w2, b2, w3, b3, w4, b4}; }
};

struct CodecParameters {
  ArchitectureConfig arch;
  int channels = 0;
  int height = 0;  // latent extents
  int width = 0;
  GridPyramid pyramid;
  ArmWeights arm;
  UpsamplerKernel upsampler;
  SynthesisWeights synthesis;

  // Deep copy; trainable flags are preserved.
  CodecParameters clone() const;
  std::vector<ag::Tensor> trainable() const;
  std::vector<ag::Tensor> network_tensors(Network network) const;

  // Checks every shape against (arch, channels, height, width).
  void validate() const;
};

// Number of scalar weights and biases in a network, in serialization order.
std::size_t network_parameter_count(const ArchitectureConfig& arch, int channels, Network network);

// Flat serialization order: tensors() order, each row-major.
std::vector<float> flatten_network(const CodecParameters& params, Network network);
void assign_network(CodecParameters& params, Network network, std::span<const float> flat);

// Zero grids, bicubic upsampler, fan-based uniform weights, zero biases.
CodecParameters init_codec_parameters(const ArchitectureConfig& arch, int channels, int height, int width,
                                      std::uint64_t seed);

// Parameters with every tensor zero (synthesis and ARM included); for tests.
CodecParameters zero_codec_parameters(const ArchitectureConfig& arch, int channels, int height, int width);

}  // namespace clric
