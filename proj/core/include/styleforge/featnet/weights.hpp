#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "styleforge/autodiff/tensor.hpp"
#include "styleforge/error.hpp"
#include "styleforge/featnet/network.hpp"

namespace styleforge::featnet {

struct LayerWeights {
  std::string layer;
  ad::Tensor kernel;
  ad::Tensor bias;
  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

/// Parameters of a network together with the NetworkSpec they belong to.
struct WeightBundle {
  static constexpr std::uint32_t kFormatVersion = 1;

  NetworkSpec spec;
  std::uint64_t seed = 0;
  // Free-form JSON object (config digest and similar), stored in the file.
  std::string metadata = "{}";
  // One entry per conv/dense layer, in spec order.
  std::vector<LayerWeights> layers;

  const LayerWeights& at(std::string_view layer) const;
  LayerWeights& at(std::string_view layer);

  /// Throws WeightShapeError unless every parameterized layer has exactly one
  /// entry with the shapes the NetworkSpec implies.
  void validate() const;

  friend bool operator==(const WeightBundle&, const WeightBundle&) = default;
};

/// He-normal kernels, zero biases. The last layer is drawn at a tenth of the
/// He scale.
WeightBundle init_weights(const NetworkSpec& spec, std::uint64_t seed);
WeightBundle zero_weights(const NetworkSpec& spec);

class WeightFormatError : public IoError {
 public:
  using IoError::IoError;
};
class WeightVersionError : public IoError {
 public:
  using IoError::IoError;
};
class WeightTruncatedError : public IoError {
 public:
  using IoError::IoError;
};
class WeightShapeError : public IoError {
 public:
  using IoError::IoError;
};

/// .sfwb layout, all integers little-endian:
///   "SFWB" | u32 version | u64 seed | u32 n + n bytes JSON {spec, metadata}
///   | u32 layer count | per layer: u32 n + n bytes UTF-8 name, then kernel
///   and bias, each as u32 rank | u32 dims[rank] | f64 values[prod(dims)].
std::vector<std::uint8_t> encode_weights(const WeightBundle& bundle);
WeightBundle decode_weights(std::span<const std::uint8_t> bytes);

void save_weights(const WeightBundle& bundle, const std::filesystem::path& path);
WeightBundle load_weights(const std::filesystem::path& path);

}  // namespace styleforge::featnet
