#include "styleforge/featnet/model.hpp"

#include <algorithm>

#include "styleforge/autodiff/ops.hpp"

namespace styleforge::featnet {

void check_input(const NetworkSpec& spec, const Image& image) {
  if (image.height() != spec.height || image.width() != spec.width || image.channels() != spec.channels) {
    throw InvalidArgument("image is " + std::to_string(image.height()) + "x" + std::to_string(image.width()) + "x" +
                          std::to_string(image.channels()) + " but network '" + spec.tag + "' expects " +
                          ad::shape_string(spec.input_shape()));
  }
}

ForwardPass build_forward(ad::Tape& tape, const WeightBundle& net, ad::Var input, const ForwardOptions& options) {
  const NetworkSpec& spec = net.spec;
  if (tape.value(input).shape() != spec.input_shape()) {
    throw ShapeError("network '" + spec.tag + "' expects input " + ad::shape_string(spec.input_shape()) + ", got " +
                     ad::shape_string(tape.value(input).shape()));
  }
  const std::size_t last = options.stop_after.value_or(spec.layers.size() - 1);

  ForwardPass pass;
  pass.outputs.reserve(last + 1);
  std::size_t param_slot = 0;
  for (std::size_t i = 0; i <= last; ++i) {
    const LayerDesc& l = spec.layers[i];
    const auto ins = spec.input_indices(i);
    const ad::Var x = ins.empty() ? input : pass.outputs[ins[0]];
    ad::Var y;
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::Dense: {
        const LayerWeights& w = net.layers.at(param_slot++);
        const ad::Var k = options.trainable ? tape.variable(w.kernel) : tape.constant(w.kernel);
        const ad::Var b = options.trainable ? tape.variable(w.bias) : tape.constant(w.bias);
        pass.params.emplace_back(k, b);
        if (l.kind == LayerKind::Conv) {
          y = ad::conv2d(tape, x, k, b, ad::Padding::Same);
        } else {
          const ad::Var flat =
              tape.value(x).rank() == 1 ? x : ad::reshape(tape, x, {tape.value(x).size()});
          y = ad::dense(tape, flat, k, b);
        }
        if (l.relu) y = ad::relu(tape, y);
        break;
      }
      case LayerKind::Pool:
        y = ad::max_pool2d(tape, x);
        break;
      case LayerKind::Relu:
        y = ad::relu(tape, x);
        break;
      case LayerKind::Dropout:
        y = (options.dropout_rng != nullptr && options.dropout_rate > 0.0)
                ? ad::dropout(tape, x, options.dropout_rate, *options.dropout_rng)
                : x;
        break;
      case LayerKind::Concat: {
        std::vector<ad::Var> parts;
        for (auto k : ins) parts.push_back(pass.outputs[k]);
        y = ad::concat_channels(tape, parts);
        break;
      }
    }
    pass.outputs.push_back(y);
  }
  return pass;
}

FeatureActivations forward_features(const WeightBundle& net, const Image& image,
                                    const std::vector<std::string>& layers) {
  check_input(net.spec, image);
  std::vector<std::size_t> indices;
  for (const auto& name : layers) indices.push_back(net.spec.index_of(name));
  FeatureActivations out;
  if (indices.empty()) return out;
  ad::Tape tape;
  const ad::Var x = tape.constant(image.to_tensor());
  ForwardOptions opts;
  opts.stop_after = *std::max_element(indices.begin(), indices.end());
  const ForwardPass pass = build_forward(tape, net, x, opts);
  for (std::size_t i = 0; i < layers.size(); ++i) out[layers[i]] = tape.value(pass.outputs[indices[i]]);
  return out;
}

ad::Tensor predict_proba(const WeightBundle& net, const Image& image) {
  check_input(net.spec, image);
  ad::Tape tape;
  const ad::Var x = tape.constant(image.to_tensor());
  const ForwardPass pass = build_forward(tape, net, x);
  return ad::softmax(tape.value(pass.outputs.back()));
}

}  // namespace styleforge::featnet
