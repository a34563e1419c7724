#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "styleforge/autodiff/tape.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/image.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::featnet {

/// Layer name -> activation captured during one forward pass.
using FeatureActivations = std::map<std::string, ad::Tensor>;

/// Tape handles of one forward pass.
struct ForwardPass {
  // Output of every evaluated layer, indexed like NetworkSpec::layers.
  std::vector<ad::Var> outputs;
  // (kernel, bias) handles for parameterized layers, in WeightBundle order.
  std::vector<std::pair<ad::Var, ad::Var>> params;
};

struct ForwardOptions {
  // Parameters become tape variables (for training) instead of constants.
  bool trainable = false;
  // Dropout is active only when a generator is supplied.
  Rng* dropout_rng = nullptr;
  double dropout_rate = 0.0;
  // Evaluate layers [0, stop_after]; defaults to the whole network.
  std::optional<std::size_t> stop_after;
};

ForwardPass build_forward(ad::Tape& tape, const WeightBundle& net, ad::Var input, const ForwardOptions& options = {});

/// Activations of the requested layers for one image; evaluation stops at the
/// deepest requested layer. Throws InvalidArgument for unknown names (listing
/// the valid ones) or an image whose size differs from the network input.
FeatureActivations forward_features(const WeightBundle& net, const Image& image,
                                    const std::vector<std::string>& layers);

/// Softmax over the final layer, dropout disabled.
ad::Tensor predict_proba(const WeightBundle& net, const Image& image);

void check_input(const NetworkSpec& spec, const Image& image);

}  // namespace styleforge::featnet
