#include "styleforge/nst/style_transfer.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "styleforge/autodiff/adam.hpp"
#include "styleforge/autodiff/ops.hpp"
#include "styleforge/digest.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::nst {

void StyleTransferConfig::validate(const featnet::NetworkSpec& spec) const {
  if (!(content_weight >= 0.0) || !(style_weight >= 0.0)) {
    throw InvalidArgument("style transfer weights must be non-negative");
  }
  if (content_weight == 0.0 && style_weight == 0.0) {
    throw InvalidArgument("content and style weights cannot both be zero");
  }
  if (iterations < 1) throw InvalidArgument("style transfer needs at least one iteration");
  if (!(learning_rate > 0.0)) throw InvalidArgument("style transfer learning rate must be positive");
  if (style_layers.empty()) throw InvalidArgument("style transfer needs at least one style layer");
  spec.index_of(content_layer);
  for (const auto& l : style_layers) spec.index_of(l);
}

std::string StyleTransferConfig::digest() const {
  const nlohmann::json j = {{"content_weight", content_weight}, {"style_weight", style_weight},
                            {"content_layer", content_layer},   {"style_layers", style_layers},
                            {"iterations", iterations},         {"learning_rate", learning_rate},
                            {"init", init == InitPolicy::Content ? "content" : "noise"}};
  return digest_hex(j.dump());
}

GramMatrix gram_matrix(const ad::Tensor& activation) {
  if (activation.rank() != 3) {
    throw ShapeError("gram_matrix: activation must be H x W x C, got " + ad::shape_string(activation.shape()));
  }
  ad::Tape tape;
  const ad::Var g = ad::gram(tape, tape.constant(activation));
  return {tape.value(g), static_cast<double>(activation.dim(0) * activation.dim(1))};
}

double content_loss(const ad::Tensor& base, const ad::Tensor& target) {
  ad::Tape tape;
  return tape.value(ad::mse(tape, tape.constant(base), tape.constant(target))).item();
}

namespace {

void check_same_layers(const std::vector<std::string>& base, const std::vector<std::string>& target) {
  std::vector<std::string> missing;
  for (const auto& name : target) {
    if (std::find(base.begin(), base.end(), name) == base.end()) missing.push_back("base lacks " + name);
  }
  for (const auto& name : base) {
    if (std::find(target.begin(), target.end(), name) == target.end()) missing.push_back("target lacks " + name);
  }
  if (!missing.empty()) {
    std::string msg = "style layer sets differ:";
    for (const auto& m : missing) msg += " " + m + ";";
    throw InvalidArgument(msg);
  }
}

template <typename Map>
std::vector<std::string> keys_of(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

}  // namespace

double style_loss(const GramSet& base, const GramSet& target) {
  check_same_layers(keys_of(base), keys_of(target));
  if (base.empty()) throw InvalidArgument("style_loss: no style layers");
  ad::Tape tape;
  double sum = 0.0;
  for (const auto& [name, g] : base) {
    const GramMatrix& a = target.at(name);
    if (g.values.shape() != a.values.shape()) {
      throw ShapeError("style layer '" + name + "': Gram " + ad::shape_string(g.values.shape()) + " vs " +
                       ad::shape_string(a.values.shape()));
    }
    sum += tape.value(ad::mse(tape, tape.constant(g.values), tape.constant(a.values))).item();
  }
  return sum / static_cast<double>(base.size());
}

double total_loss(double content, double style, const StyleTransferConfig& config) {
  if (!(content >= 0.0) || !(style >= 0.0)) throw InvalidArgument("total_loss: losses must be non-negative");
  return config.content_weight * content + config.style_weight * style;
}

StyleTargets compute_targets(const featnet::WeightBundle& net, const Image& content, const Image& style,
                             const StyleTransferConfig& config) {
  config.validate(net.spec);
  StyleTargets targets;
  targets.content = featnet::forward_features(net, content, {config.content_layer}).at(config.content_layer);
  const auto feats = featnet::forward_features(net, style, config.style_layers);
  for (const auto& name : config.style_layers) targets.style[name] = gram_matrix(feats.at(name));
  return targets;
}

LossGraph build_loss(ad::Tape& tape, const featnet::WeightBundle& net, const ad::Tensor& base,
                     const StyleTargets& targets, const StyleTransferConfig& config) {
  const auto& spec = net.spec;
  const std::size_t content_idx = spec.index_of(config.content_layer);
  std::size_t deepest = content_idx;
  for (const auto& name : config.style_layers) deepest = std::max(deepest, spec.index_of(name));

  LossGraph graph;
  graph.image = tape.variable(base);
  featnet::ForwardOptions opts;
  opts.stop_after = deepest;
  const auto pass = featnet::build_forward(tape, net, graph.image, opts);

  graph.content = ad::mse(tape, pass.outputs[content_idx], tape.constant(targets.content));

  std::optional<ad::Var> style_sum;
  for (const auto& name : config.style_layers) {
    const auto it = targets.style.find(name);
    if (it == targets.style.end()) throw InvalidArgument("style targets lack layer '" + name + "'");
    const ad::Var g = ad::gram(tape, pass.outputs[spec.index_of(name)]);
    const ad::Var layer_loss = ad::mse(tape, g, tape.constant(it->second.values));
    graph.style_per_layer.emplace_back(name, layer_loss);
    style_sum = style_sum ? ad::add(tape, *style_sum, layer_loss) : layer_loss;
  }
  graph.style = ad::scale(tape, *style_sum, 1.0 / static_cast<double>(config.style_layers.size()));
  graph.total = ad::add(tape, ad::scale(tape, graph.content, config.content_weight),
                        ad::scale(tape, graph.style, config.style_weight));
  return graph;
}

namespace {

LossBreakdown breakdown(const ad::Tape& tape, const LossGraph& graph) {
  LossBreakdown out;
  out.content = tape.value(graph.content).item();
  out.style = tape.value(graph.style).item();
  out.total = tape.value(graph.total).item();
  for (const auto& [name, v] : graph.style_per_layer) out.style_per_layer.emplace_back(name, tape.value(v).item());
  return out;
}

}  // namespace

LossBreakdown evaluate_loss(const featnet::WeightBundle& net, const Image& base, const StyleTargets& targets,
                            const StyleTransferConfig& config) {
  featnet::check_input(net.spec, base);
  ad::Tape tape;
  const LossGraph graph = build_loss(tape, net, base.to_tensor(), targets, config);
  return breakdown(tape, graph);
}

ad::Tensor pixel_gradient(const featnet::WeightBundle& net, const Image& base, const StyleTargets& targets,
                          const StyleTransferConfig& config) {
  featnet::check_input(net.spec, base);
  ad::Tape tape;
  const LossGraph graph = build_loss(tape, net, base.to_tensor(), targets, config);
  tape.backward(graph.total);
  return tape.grad(graph.image);
}

SynthesisResult synthesize(const Image& content, const Image& style, const featnet::WeightBundle& net,
                           const StyleTransferConfig& config, std::uint64_t seed, std::string content_id,
                           std::string style_id) {
  featnet::check_input(net.spec, content);
  featnet::check_input(net.spec, style);
  const StyleTargets targets = compute_targets(net, content, style, config);

  ad::Tensor pixels = content.to_tensor();
  if (config.init == InitPolicy::Noise) {
    Rng rng(seed);
    for (auto& v : pixels.data()) v = rng.uniform();
  }
  ad::AdamState adam(pixels.shape(), ad::AdamOptions{config.learning_rate, 0.9, 0.999, 1e-8});

  SynthesisResult result;
  result.trace.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    ad::Tape tape;
    const LossGraph graph = build_loss(tape, net, pixels, targets, config);
    LossBreakdown losses = breakdown(tape, graph);
    if (!std::isfinite(losses.total)) {
      throw NonFiniteLoss(it, "style transfer loss became non-finite at iteration " + std::to_string(it));
    }
    tape.backward(graph.total);
    const ad::Tensor grad = tape.grad(graph.image);
    result.trace.push_back(std::move(losses));
    ad::adam_step(pixels, grad, adam);
    for (auto& v : pixels.data()) v = std::clamp(v, 0.0, 1.0);
  }
  result.image = Image::from_tensor(pixels);
  result.final_loss = evaluate_loss(net, result.image, targets, config);
  if (!std::isfinite(result.final_loss.total)) {
    throw NonFiniteLoss(config.iterations, "style transfer produced a non-finite final loss");
  }
  result.provenance = {std::move(content_id), std::move(style_id), seed, config.digest()};
  return result;
}

}  // namespace styleforge::nst
