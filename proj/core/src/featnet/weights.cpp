#include "styleforge/featnet/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "styleforge/rng.hpp"

namespace styleforge::featnet {

const LayerWeights& WeightBundle::at(std::string_view layer) const {
  for (const auto& l : layers) {
    if (l.layer == layer) return l;
  }
  throw InvalidArgument("no weights for layer '" + std::string(layer) + "'");
}

LayerWeights& WeightBundle::at(std::string_view layer) {
  for (auto& l : layers) {
    if (l.layer == layer) return l;
  }
  throw InvalidArgument("no weights for layer '" + std::string(layer) + "'");
}

void WeightBundle::validate() const {
  std::size_t expected = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& desc = spec.layers[i];
    if (!desc.has_params()) continue;
    ++expected;
    std::size_t hits = 0;
    for (const auto& l : layers) hits += l.layer == desc.name ? 1 : 0;
    if (hits != 1) {
      throw WeightShapeError("layer '" + desc.name + "' has " + std::to_string(hits) + " weight entries, expected 1");
    }
    const auto [kshape, bshape] = spec.param_shapes(i);
    const auto& w = at(desc.name);
    if (w.kernel.shape() != kshape || w.bias.shape() != bshape) {
      throw WeightShapeError("layer '" + desc.name + "' weights " + ad::shape_string(w.kernel.shape()) + "/" +
                             ad::shape_string(w.bias.shape()) + " do not match spec " + ad::shape_string(kshape) +
                             "/" + ad::shape_string(bshape));
    }
  }
  if (layers.size() != expected) {
    throw WeightShapeError("bundle has " + std::to_string(layers.size()) + " weight entries, spec declares " +
                           std::to_string(expected));
  }
  std::size_t slot = 0;
  for (const auto& desc : spec.layers) {
    if (!desc.has_params()) continue;
    if (layers[slot].layer != desc.name) {
      throw WeightShapeError("weight entry " + std::to_string(slot) + " is '" + layers[slot].layer +
                             "', spec order expects '" + desc.name + "'");
    }
    ++slot;
  }
}

WeightBundle zero_weights(const NetworkSpec& spec) {
  spec.validate();
  WeightBundle bundle;
  bundle.spec = spec;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (!spec.layers[i].has_params()) continue;
    const auto [kshape, bshape] = spec.param_shapes(i);
    bundle.layers.push_back({spec.layers[i].name, ad::Tensor(kshape, 0.0), ad::Tensor(bshape, 0.0)});
  }
  return bundle;
}

namespace {

constexpr double kOutputInitScale = 0.1;

}  // namespace

WeightBundle init_weights(const NetworkSpec& spec, std::uint64_t seed) {
  WeightBundle bundle = zero_weights(spec);
  bundle.seed = seed;
  Rng rng(seed);
  for (auto& l : bundle.layers) {
    const auto& shape = l.kernel.shape();
    const std::size_t fan_in = l.kernel.size() / shape.back();
    double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    if (&l == &bundle.layers.back()) stddev *= kOutputInitScale;
    for (auto& v : l.kernel.data()) v = stddev * rng.normal();
  }
  return bundle;
}

namespace {

constexpr char kMagic[4] = {'S', 'F', 'W', 'B'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  void tensor(const ad::Tensor& t) {
    u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) u32(static_cast<std::uint32_t>(d));
    for (double v : t.data()) f64(v);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // `where` names the section being read so truncation errors can say where.
  void need(std::size_t n, const std::string& where) const {
    if (bytes_.size() - offset_ < n) {
      throw WeightTruncatedError("weight file truncated while reading " + where + " (needed " + std::to_string(n) +
                                 " bytes at offset " + std::to_string(offset_) + ", file has " +
                                 std::to_string(bytes_.size()) + ")");
    }
  }
  std::uint32_t u32(const std::string& where) {
    need(4, where);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
    offset_ += 4;
    return v;
  }
  std::uint64_t u64(const std::string& where) {
    need(8, where);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
    offset_ += 8;
    return v;
  }
  std::string str(const std::string& where) {
    const std::uint32_t n = u32(where);
    need(n, where);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_), n);
    offset_ += n;
    return s;
  }
  ad::Tensor tensor(const std::string& where) {
    const std::uint32_t rank = u32(where);
    if (rank == 0 || rank > 8) throw WeightFormatError("implausible tensor rank " + std::to_string(rank) + " in " + where);
    ad::Shape shape;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint32_t d = u32(where);
      if (d == 0) throw WeightFormatError("zero dimension in " + where);
      shape.push_back(d);
      count *= d;
    }
    need(count * 8, where);
    std::vector<double> data(count);
    for (auto& v : data) v = std::bit_cast<double>(u64(where));
    return ad::Tensor(std::move(shape), std::move(data));
  }
  bool at_end() const { return offset_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_weights(const WeightBundle& bundle) {
  bundle.validate();
  Writer w;
  w.raw(std::string_view(kMagic, 4));
  w.u32(WeightBundle::kFormatVersion);
  w.u64(bundle.seed);
  const nlohmann::json header = {{"spec", bundle.spec}, {"metadata", nlohmann::json::parse(bundle.metadata)}};
  w.str(header.dump());
  w.u32(static_cast<std::uint32_t>(bundle.layers.size()));
  for (const auto& l : bundle.layers) {
    w.str(l.layer);
    w.tensor(l.kernel);
    w.tensor(l.bias);
  }
  return w.take();
}

WeightBundle decode_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw WeightFormatError("not a weight file: bad magic bytes (expected \"SFWB\")");
  }
  Reader r(bytes.subspan(4));
  const std::uint32_t version = r.u32("header");
  if (version != WeightBundle::kFormatVersion) {
    throw WeightVersionError("unsupported weight format version " + std::to_string(version) + " (expected " +
                             std::to_string(WeightBundle::kFormatVersion) + ")");
  }
  WeightBundle bundle;
  bundle.seed = r.u64("header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.str("header"));
    bundle.spec = header.at("spec").get<NetworkSpec>();
    bundle.metadata = header.value("metadata", nlohmann::json::object()).dump();
  } catch (const nlohmann::json::exception& e) {
    throw WeightFormatError(std::string("malformed weight header: ") + e.what());
  }
  const std::uint32_t count = r.u32("layer table");
  for (std::uint32_t i = 0; i < count; ++i) {
    // The name may itself be cut off; attribute that to the layer index.
    const std::string name = r.str("layer #" + std::to_string(i) + " name");
    const std::string where = "layer '" + name + "'";
    LayerWeights l{name, r.tensor(where), r.tensor(where)};
    bundle.layers.push_back(std::move(l));
  }
  if (!r.at_end()) throw WeightFormatError("trailing bytes after last layer");
  bundle.validate();
  return bundle;
}

void save_weights(const WeightBundle& bundle, const std::filesystem::path& path) {
  const auto bytes = encode_weights(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

WeightBundle load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_weights(bytes);
}

}  // namespace styleforge::featnet
