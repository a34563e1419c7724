#include "styleforge/featnet/network.hpp"

#include <set>

#include "styleforge/autodiff/ops.hpp"
#include "styleforge/error.hpp"

namespace styleforge::featnet {

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Pool: return "pool";
    case LayerKind::Relu: return "relu";
    case LayerKind::Dense: return "dense";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Concat: return "concat";
  }
  return "unknown";
}

namespace {

LayerKind parse_kind(const std::string& name) {
  for (auto k : {LayerKind::Conv, LayerKind::Pool, LayerKind::Relu, LayerKind::Dense, LayerKind::Dropout,
                 LayerKind::Concat}) {
    if (kind_name(k) == name) return k;
  }
  throw InvalidArgument("unknown layer kind '" + name + "'");
}

}  // namespace

std::optional<std::size_t> NetworkSpec::find(std::string_view name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t NetworkSpec::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  std::string valid;
  for (const auto& l : layers) valid += (valid.empty() ? "" : ", ") + l.name;
  throw InvalidArgument("unknown layer '" + std::string(name) + "'; valid layers: " + valid);
}

std::vector<std::size_t> NetworkSpec::input_indices(std::size_t layer) const {
  const LayerDesc& l = layers.at(layer);
  if (l.inputs.empty()) {
    if (layer == 0) return {};
    return {layer - 1};
  }
  std::vector<std::size_t> out;
  for (const auto& name : l.inputs) {
    const std::size_t idx = index_of(name);
    if (idx >= layer) throw InvalidArgument("layer '" + l.name + "' reads later layer '" + name + "'");
    out.push_back(idx);
  }
  return out;
}

void NetworkSpec::validate() const {
  if (height == 0 || width == 0 || channels == 0) throw InvalidArgument("network input size must be positive");
  if (layers.empty()) throw InvalidArgument("network has no layers");
  std::set<std::string> names;
  std::size_t blocks = 0;
  bool conv_in_block = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.name.empty()) throw InvalidArgument("layer " + std::to_string(i) + " has no name");
    if (!names.insert(l.name).second) throw InvalidArgument("duplicate layer name '" + l.name + "'");
    if (l.kind == LayerKind::Concat && l.inputs.size() < 2) {
      throw InvalidArgument("concat layer '" + l.name + "' needs at least two inputs");
    }
    if (l.kind != LayerKind::Concat && l.inputs.size() > 1) {
      throw InvalidArgument("layer '" + l.name + "' can read only one input");
    }
    if (l.kind == LayerKind::Conv && (l.kernel % 2 == 0 || l.units == 0)) {
      throw InvalidArgument("conv layer '" + l.name + "' needs an odd kernel and positive channel count");
    }
    if (l.kind == LayerKind::Dense && l.units == 0) {
      throw InvalidArgument("dense layer '" + l.name + "' needs positive units");
    }
    input_indices(i);
    if (l.kind == LayerKind::Conv) conv_in_block = true;
    if (l.kind == LayerKind::Pool && conv_in_block) {
      ++blocks;
      conv_in_block = false;
    }
  }
  if (conv_in_block) ++blocks;
  if (blocks < 2) throw InvalidArgument("network needs at least two conv blocks separated by pooling");
  if (!content_layer.empty()) index_of(content_layer);
  for (const auto& s : style_layers) index_of(s);
  output_shapes();
}

std::vector<ad::Shape> NetworkSpec::output_shapes() const {
  std::vector<ad::Shape> shapes;
  shapes.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const auto ins = input_indices(i);
    const ad::Shape in = ins.empty() ? input_shape() : shapes[ins[0]];
    switch (l.kind) {
      case LayerKind::Conv:
        shapes.push_back(ad::conv2d_output_shape(in, {l.kernel, l.kernel, in.at(2), l.units}, ad::Padding::Same));
        break;
      case LayerKind::Pool:
        shapes.push_back(ad::max_pool2d_output_shape(in));
        break;
      case LayerKind::Relu:
      case LayerKind::Dropout:
        shapes.push_back(in);
        break;
      case LayerKind::Dense:
        shapes.push_back({l.units});
        break;
      case LayerKind::Concat: {
        ad::Shape out = shapes[ins[0]];
        if (out.size() != 3) throw ShapeError("concat layer '" + l.name + "' needs H x W x C inputs");
        out[2] = 0;
        for (auto k : ins) {
          const auto& s = shapes[k];
          if (s.size() != 3 || s[0] != out[0] || s[1] != out[1]) {
            throw ShapeError("concat layer '" + l.name + "' has spatially mismatched inputs");
          }
          out[2] += s[2];
        }
        shapes.push_back(out);
        break;
      }
    }
  }
  return shapes;
}

std::pair<ad::Shape, ad::Shape> NetworkSpec::param_shapes(std::size_t layer) const {
  const auto& l = layers.at(layer);
  const auto ins = input_indices(layer);
  const auto shapes = output_shapes();
  const ad::Shape in = ins.empty() ? input_shape() : shapes[ins[0]];
  if (l.kind == LayerKind::Conv) return {{l.kernel, l.kernel, in.at(2), l.units}, {l.units}};
  if (l.kind == LayerKind::Dense) return {{ad::shape_size(in), l.units}, {l.units}};
  throw InvalidArgument("layer '" + l.name + "' has no parameters");
}

void to_json(nlohmann::json& j, const NetworkSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    nlohmann::json e = {{"name", l.name}, {"kind", std::string(kind_name(l.kind))}};
    if (l.kind == LayerKind::Conv) e["kernel"] = l.kernel;
    if (l.has_params()) {
      e["units"] = l.units;
      e["relu"] = l.relu;
    }
    if (!l.inputs.empty()) e["inputs"] = l.inputs;
    layers.push_back(std::move(e));
  }
  j = {{"tag", spec.tag},
       {"input", {spec.height, spec.width, spec.channels}},
       {"layers", std::move(layers)},
       {"content_layer", spec.content_layer},
       {"style_layers", spec.style_layers}};
}

void from_json(const nlohmann::json& j, NetworkSpec& spec) {
  spec = NetworkSpec{};
  spec.tag = j.at("tag").get<std::string>();
  const auto& input = j.at("input");
  spec.height = input.at(0).get<std::size_t>();
  spec.width = input.at(1).get<std::size_t>();
  spec.channels = input.at(2).get<std::size_t>();
  for (const auto& e : j.at("layers")) {
    LayerDesc l;
    l.name = e.at("name").get<std::string>();
    l.kind = parse_kind(e.at("kind").get<std::string>());
    l.kernel = e.value("kernel", std::size_t{0});
    l.units = e.value("units", std::size_t{0});
    l.relu = e.value("relu", false);
    if (e.contains("inputs")) l.inputs = e.at("inputs").get<std::vector<std::string>>();
    spec.layers.push_back(std::move(l));
  }
  spec.content_layer = j.value("content_layer", std::string{});
  spec.style_layers = j.value("style_layers", std::vector<std::string>{});
}

NetworkSpec feature_extractor_spec(std::size_t size, std::size_t channels) {
  NetworkSpec spec;
  spec.tag = "featnet";
  spec.height = size;
  spec.width = size;
  spec.channels = channels;
  const std::size_t widths[4] = {16, 32, 64, 64};
  for (std::size_t b = 0; b < 4; ++b) {
    const std::string block = std::to_string(b + 1);
    spec.layers.push_back({"conv" + block + "_1", LayerKind::Conv, 3, widths[b], true, {}});
    spec.layers.push_back({"conv" + block + "_2", LayerKind::Conv, 3, widths[b], true, {}});
    spec.layers.push_back({"pool" + block, LayerKind::Pool, 0, 0, false, {}});
  }
  spec.layers.push_back({"fc1", LayerKind::Dense, 0, 64, true, {}});
  spec.layers.push_back({"drop1", LayerKind::Dropout, 0, 0, false, {}});
  spec.layers.push_back({"fc2", LayerKind::Dense, 0, 2, false, {}});
  spec.content_layer = "conv4_2";
  spec.style_layers = {"conv1_1", "conv2_1", "conv3_1", "conv4_1"};
  return spec;
}

}  // namespace styleforge::featnet
