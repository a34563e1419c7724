#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "styleforge/autodiff/tensor.hpp"

namespace styleforge::featnet {

enum class LayerKind { Conv, Pool, Relu, Dense, Dropout, Concat };

std::string_view kind_name(LayerKind kind);

/// One node of a feed-forward network description.
///
/// A layer reads the previous layer's output unless `inputs` names other
/// layers (concat reads all of them). Conv and dense layers may fuse a relu,
/// in which case their named output is post-activation. Dense layers flatten
/// their input.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  std::size_t kernel = 0;  // conv: odd side length
  std::size_t units = 0;   // conv: output channels; dense: output width
  bool relu = false;
  std::vector<std::string> inputs;

  bool has_params() const { return kind == LayerKind::Conv || kind == LayerKind::Dense; }
  friend bool operator==(const LayerDesc&, const LayerDesc&) = default;
};

struct NetworkSpec {
  std::string tag;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<LayerDesc> layers;
  // Empty for networks that are never used for style transfer.
  std::string content_layer;
  std::vector<std::string> style_layers;

  /// Throws InvalidArgument on duplicate names, dangling inputs, fewer than
  /// two conv blocks separated by a pool, or undeclared content/style layers.
  void validate() const;

  /// Index of a layer; throws InvalidArgument listing the valid names.
  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;

  /// Indices of the layers a given layer reads.
  std::vector<std::size_t> input_indices(std::size_t layer) const;

  ad::Shape input_shape() const { return {height, width, channels}; }

  /// Output shape of every layer for the declared input size.
  std::vector<ad::Shape> output_shapes() const;

  /// Kernel and bias shapes of a parameterized layer.
  std::pair<ad::Shape, ad::Shape> param_shapes(std::size_t layer) const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

void to_json(nlohmann::json& j, const NetworkSpec& spec);
void from_json(const nlohmann::json& j, NetworkSpec& spec);

/// Miniature VGG used to extract style and content features: four blocks of
/// two 3x3 convs (16/32/64/64 channels) each followed by 2x2 max pooling, then
/// two dense layers ending in a 2-way head. Content layer conv4_2, style
/// layers conv1_1..conv4_1.
NetworkSpec feature_extractor_spec(std::size_t size = 32, std::size_t channels = 3);

}  // namespace styleforge::featnet
