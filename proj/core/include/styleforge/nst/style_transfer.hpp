#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "styleforge/autodiff/tape.hpp"
#include "styleforge/error.hpp"
#include "styleforge/featnet/model.hpp"
#include "styleforge/image.hpp"

namespace styleforge::nst {

enum class InitPolicy { Content, Noise };

struct StyleTransferConfig {
  double content_weight = 0.025;
  double style_weight = 1.0;
  std::string content_layer = "conv4_2";
  std::vector<std::string> style_layers = {"conv1_1", "conv2_1", "conv3_1", "conv4_1"};
  std::size_t iterations = 200;
  double learning_rate = 0.01;
  InitPolicy init = InitPolicy::Content;

  /// Weights non-negative and not both zero, iterations >= 1, layers present
  /// in the network.
  void validate(const featnet::NetworkSpec& spec) const;

  /// Stable hex digest of every field.
  std::string digest() const;
};

/// C x C channel Gram matrix of one layer, normalized by H * W.
struct GramMatrix {
  ad::Tensor values;
  double normalization = 1.0;

  std::size_t channels() const { return values.dim(0); }
};

using GramSet = std::map<std::string, GramMatrix>;

GramMatrix gram_matrix(const ad::Tensor& activation);

double content_loss(const ad::Tensor& base, const ad::Tensor& target);

/// Mean over layers of the per-layer Gram MSE. Both sets must name the same
/// layers; a mismatch is rejected naming the missing layers.
double style_loss(const GramSet& base, const GramSet& target);

/// w_c * L_c + w_s * L_s; negative losses are rejected.
double total_loss(double content, double style, const StyleTransferConfig& config);

struct LossBreakdown {
  double content = 0.0;
  double style = 0.0;
  double total = 0.0;
  std::vector<std::pair<std::string, double>> style_per_layer;
};

/// Fixed representations the base image is pulled towards.
struct StyleTargets {
  ad::Tensor content;  // P: content-layer activation of the content image
  GramSet style;       // A: Gram matrices of the style image
};

StyleTargets compute_targets(const featnet::WeightBundle& net, const Image& content, const Image& style,
                             const StyleTransferConfig& config);

/// Records L_c, L_s and L_t for `base` on a tape and returns the handles.
struct LossGraph {
  ad::Var image;
  ad::Var content;
  ad::Var style;
  ad::Var total;
  std::vector<std::pair<std::string, ad::Var>> style_per_layer;
};

LossGraph build_loss(ad::Tape& tape, const featnet::WeightBundle& net, const ad::Tensor& base,
                     const StyleTargets& targets, const StyleTransferConfig& config);

LossBreakdown evaluate_loss(const featnet::WeightBundle& net, const Image& base, const StyleTargets& targets,
                            const StyleTransferConfig& config);

/// d(L_t)/d(pixels) at `base`.
ad::Tensor pixel_gradient(const featnet::WeightBundle& net, const Image& base, const StyleTargets& targets,
                          const StyleTransferConfig& config);

struct Provenance {
  std::string content_id;
  std::string style_id;
  std::uint64_t seed = 0;
  std::string config_digest;
};

struct SynthesisResult {
  Image image;
  // Loss of the base image before each update; size == iterations.
  std::vector<LossBreakdown> trace;
  // Loss of the returned image.
  LossBreakdown final_loss;
  Provenance provenance;
};

/// Raised when the loss stops being finite; carries the iteration index.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(std::size_t iteration, const std::string& what) : Error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Optimizes a base image with Adam so its content-layer features follow
/// `content` and its Gram statistics follow `style`. Pixels are clamped to
/// [0, 1] after every step.
SynthesisResult synthesize(const Image& content, const Image& style, const featnet::WeightBundle& net,
                           const StyleTransferConfig& config, std::uint64_t seed, std::string content_id = {},
                           std::string style_id = {});

}  // namespace styleforge::nst
