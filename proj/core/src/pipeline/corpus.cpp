#include "styleforge/pipeline/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <set>

#include "styleforge/error.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::pipeline {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSensorNoise = 0.02;

double smoothstep(double edge0, double edge1, double x) {
  const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

using Rgb = std::array<double, 3>;

struct Blob {
  double cy, cx, radius, aspect, angle;
};

Blob random_blob(Rng& rng, std::size_t height, std::size_t width) {
  const double side = static_cast<double>(std::min(height, width));
  Blob b;
  b.cy = static_cast<double>(height) * rng.uniform(0.4, 0.6);
  b.cx = static_cast<double>(width) * rng.uniform(0.4, 0.6);
  b.radius = side * rng.uniform(0.24, 0.36);
  b.aspect = rng.uniform(0.75, 1.0);
  b.angle = rng.uniform(0.0, kPi);
  return b;
}

// Polar coordinates relative to the blob, with the ellipse mapped to a circle.
void blob_polar(const Blob& b, double y, double x, double& r, double& theta) {
  const double dy = y - b.cy, dx = x - b.cx;
  const double u = dx * std::cos(b.angle) + dy * std::sin(b.angle);
  const double v = (-dx * std::sin(b.angle) + dy * std::cos(b.angle)) / b.aspect;
  r = std::sqrt(u * u + v * v);
  theta = std::atan2(v, u);
}

Rgb skin_tone(Rng& rng) { return {rng.uniform(0.78, 0.9), rng.uniform(0.6, 0.72), rng.uniform(0.5, 0.62)}; }

Rgb brown_tone(Rng& rng) { return {rng.uniform(0.5, 0.62), rng.uniform(0.32, 0.42), rng.uniform(0.22, 0.32)}; }

Rgb dark_tone(Rng& rng) { return {rng.uniform(0.2, 0.34), rng.uniform(0.16, 0.26), rng.uniform(0.24, 0.38)}; }

Image render_benign(std::size_t height, std::size_t width, Rng& rng) {
  const Blob b = random_blob(rng, height, width);
  const Rgb skin = skin_tone(rng), lesion = brown_tone(rng);
  const double softness = rng.uniform(0.25, 0.45);
  const double shade_angle = rng.uniform(0.0, 2.0 * kPi);
  const double shade = rng.uniform(0.0, 0.06);

  Image img(height, width, 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double r, theta;
      blob_polar(b, static_cast<double>(y) + 0.5, static_cast<double>(x) + 0.5, r, theta);
      const double inside = 1.0 - smoothstep(b.radius * (1.0 - softness), b.radius * (1.0 + softness), r);
      const double core = 1.0 - 0.25 * (r / b.radius);
      const double light = shade * std::cos(theta - shade_angle);
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = skin[c] + inside * (lesion[c] * core - skin[c]) + light;
        img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return img;
}

Image render_malignant(std::size_t height, std::size_t width, Rng& rng) {
  const Blob b = random_blob(rng, height, width);
  const Rgb skin = skin_tone(rng), lesion = dark_tone(rng);

  std::array<double, 5> amp{}, phase{};
  for (std::size_t k = 0; k < amp.size(); ++k) {
    amp[k] = rng.uniform(0.03, 0.09);
    phase[k] = rng.uniform(0.0, 2.0 * kPi);
  }
  const double stripe_freq = rng.uniform(0.12, 0.22);
  const double stripe_angle = rng.uniform(0.0, kPi);
  const double stripe_phase = rng.uniform(0.0, 2.0 * kPi);
  const double stripe_amp = rng.uniform(0.14, 0.26);
  const double cs = std::cos(stripe_angle), sn = std::sin(stripe_angle);

  Image img(height, width, 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double py = static_cast<double>(y) + 0.5, px = static_cast<double>(x) + 0.5;
      double r, theta;
      blob_polar(b, py, px, r, theta);
      double edge = 1.0;
      for (std::size_t k = 0; k < amp.size(); ++k) {
        edge += amp[k] * std::sin(static_cast<double>(k + 3) * theta + phase[k]);
      }
      const double inside = 1.0 - smoothstep(b.radius * edge - 0.6, b.radius * edge + 0.6, r);
      const double stripe = std::sin(2.0 * kPi * stripe_freq * (px * cs + py * sn) + stripe_phase);
      for (std::size_t c = 0; c < 3; ++c) {
        const double tex = lesion[c] * (1.0 + stripe_amp * stripe);
        const double v = skin[c] + inside * (tex - skin[c]);
        img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return img;
}

std::string image_id(Label label, std::size_t index) { return fmt::format("{}_{:04d}", label_name(label), index); }

}  // namespace

Image render_lesion(Label label, std::size_t height, std::size_t width, std::uint64_t seed) {
  if (height < 16 || width < 16) {
    throw InvalidArgument(fmt::format("corpus images must be at least 16x16, got {}x{}", height, width));
  }
  Rng rng(seed);
  Image img = label == Label::Benign ? render_benign(height, width, rng) : render_malignant(height, width, rng);
  // Shared sensor noise, so noise level alone does not separate the classes.
  for (auto& v : img.pixels()) v = std::clamp(v + kSensorNoise * rng.normal(), 0.0, 1.0);
  return img;
}

double laplacian_energy(const Image& image) {
  const std::size_t h = image.height(), w = image.width();
  if (h < 3 || w < 3) throw InvalidArgument("laplacian_energy needs an image of at least 3x3");
  auto luma = [&](std::size_t y, std::size_t x) {
    if (image.channels() < 3) return image.at(y, x, 0);
    return 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
  };
  double sum = 0.0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      sum += std::abs(4.0 * luma(y, x) - luma(y - 1, x) - luma(y + 1, x) - luma(y, x - 1) - luma(y, x + 1));
    }
  }
  return sum / static_cast<double>((h - 2) * (w - 2));
}

DatasetManifest gen_corpus(const CorpusShape& shape, std::uint64_t seed, const std::filesystem::path& root,
                           const std::vector<PngText>& text) {
  if (shape.per_class < 1) throw InvalidArgument("gen_corpus needs at least one image per class");
  if (shape.height < 16 || shape.width < 16) {
    throw InvalidArgument(fmt::format("corpus images must be at least 16x16, got {}x{}", shape.height, shape.width));
  }
  DatasetManifest manifest;
  for (const Label label : {Label::Benign, Label::Malignant}) {
    const auto dir = root / "real" / std::string(label_name(label));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < shape.per_class; ++i) {
      const std::string id = image_id(label, i);
      const auto image = render_lesion(label, shape.height, shape.width,
                                       derive_seed(seed, 0xc0de + label_index(label), i));
      const std::string rel = "real/" + std::string(label_name(label)) + "/" + id + ".png";
      auto chunks = text;
      chunks.push_back({"id", id});
      chunks.push_back({"label", std::string(label_name(label))});
      write_png(root / rel, image, chunks);
      Record record;
      record.id = id;
      record.path = rel;
      record.label = label;
      manifest.append(std::move(record));
    }
  }
  return manifest;
}

std::vector<std::string> reserve_pool(const DatasetManifest& real, std::size_t per_class, std::uint64_t seed) {
  std::set<std::string> chosen;
  for (const Label label : {Label::Benign, Label::Malignant}) {
    auto records = real.real_with_label(label);
    if (records.size() < per_class) {
      throw InvalidArgument(fmt::format("cannot reserve {} '{}' images out of {}", per_class, label_name(label),
                                        records.size()));
    }
    Rng rng(derive_seed(seed, 0x7e5e + label_index(label)));
    rng.shuffle(records);
    for (std::size_t i = 0; i < per_class; ++i) chosen.insert(records[i]->id);
  }
  std::vector<std::string> out;
  for (const auto& r : real.records()) {
    if (chosen.contains(r.id)) out.push_back(r.id);
  }
  return out;
}

}  // namespace styleforge::pipeline
