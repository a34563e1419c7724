#include "styleforge/augment/affine.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "styleforge/error.hpp"

namespace styleforge::augment {

namespace {

// Row-major 2x2 matrix acting on (x, y) offsets from the image centre.
using Mat2 = std::array<double, 4>;

constexpr Mat2 kIdentity = {1.0, 0.0, 0.0, 1.0};

Mat2 multiply(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

// Exact values at multiples of 90 degrees keep quarter turns lossless.
std::pair<double, double> cos_sin_degrees(double degrees) {
  const double quarter = degrees / 90.0;
  if (quarter == std::round(quarter)) {
    switch (((static_cast<long>(std::round(quarter)) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double rad = degrees * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

// Inverse maps: destination offset -> source offset.
Mat2 inverse_rotation(double degrees) {
  const auto [c, s] = cos_sin_degrees(degrees);
  return {c, s, -s, c};
}

Mat2 inverse_zoom(double factor) { return {1.0 / factor, 0.0, 0.0, 1.0 / factor}; }

Mat2 inverse_shear(double factor) { return {1.0, -factor, 0.0, 1.0}; }

double sample(const Image& img, double sx, double sy, std::size_t c) {
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const double ax = sx - fx;
  const double ay = sy - fy;
  const auto x0 = static_cast<long>(fx);
  const auto y0 = static_cast<long>(fy);
  auto px = [&](long x, long y) -> double {
    if (x < 0 || y < 0 || x >= static_cast<long>(img.width()) || y >= static_cast<long>(img.height())) return 0.0;
    return img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
  };
  const double top = ax == 0.0 ? px(x0, y0) : px(x0, y0) * (1.0 - ax) + px(x0 + 1, y0) * ax;
  if (ay == 0.0) return top;
  const double bottom = ax == 0.0 ? px(x0, y0 + 1) : px(x0, y0 + 1) * (1.0 - ax) + px(x0 + 1, y0 + 1) * ax;
  return top * (1.0 - ay) + bottom * ay;
}

Image resample(const Image& image, const Mat2& inv) {
  if (inv == kIdentity) return image;
  Image out(image.height(), image.width(), image.channels(), 0.0);
  const double cx = (static_cast<double>(image.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(image.height()) - 1.0) / 2.0;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = cx + inv[0] * dx + inv[1] * dy;
      const double sy = cy + inv[2] * dx + inv[3] * dy;
      for (std::size_t c = 0; c < image.channels(); ++c) out.at(y, x, c) = sample(image, sx, sy, c);
    }
  }
  return out;
}

Image reflect(const Image& image, Axis axis) {
  Image out(image.height(), image.width(), image.channels());
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const std::size_t sy = axis == Axis::Vertical ? image.height() - 1 - y : y;
      const std::size_t sx = axis == Axis::Horizontal ? image.width() - 1 - x : x;
      for (std::size_t c = 0; c < image.channels(); ++c) out.at(y, x, c) = image.at(sy, sx, c);
    }
  }
  return out;
}

}  // namespace

void AffineOp::validate() const {
  if (!std::isfinite(value)) throw InvalidArgument("affine parameter must be finite");
  if (kind == AffineKind::Rotation && (value < -180.0 || value > 180.0)) {
    throw InvalidArgument("rotation must be within [-180, 180] degrees, got " + std::to_string(value));
  }
  if (kind == AffineKind::Zoom && !(value > 0.0)) {
    throw InvalidArgument("zoom factor must be positive, got " + std::to_string(value));
  }
}

Image apply_affine(const Image& image, const AffineOp& op) {
  if (image.empty()) throw InvalidArgument("apply_affine: empty image");
  op.validate();
  switch (op.kind) {
    case AffineKind::Rotation: return resample(image, inverse_rotation(op.value));
    case AffineKind::Zoom: return resample(image, inverse_zoom(op.value));
    case AffineKind::Shear: return resample(image, inverse_shear(op.value));
    case AffineKind::Reflection: return reflect(image, op.axis);
  }
  return image;
}

void AugmentRanges::validate() const {
  if (!(rotation_degrees >= 0.0 && rotation_degrees <= 180.0)) {
    throw InvalidArgument("augment rotation range must be within [0, 180] degrees");
  }
  if (!(zoom_min > 0.0 && zoom_min <= zoom_max && std::isfinite(zoom_max))) {
    throw InvalidArgument("augment zoom range must satisfy 0 < zoom_min <= zoom_max");
  }
  if (!(shear >= 0.0 && std::isfinite(shear))) throw InvalidArgument("augment shear range must be non-negative");
  if (!(reflection_probability >= 0.0 && reflection_probability <= 1.0)) {
    throw InvalidArgument("augment reflection probability must be within [0, 1]");
  }
}

AugmentParams sample_augment(const AugmentRanges& ranges, Rng& rng) {
  AugmentParams p;
  p.rotation_degrees = rng.uniform(-ranges.rotation_degrees, ranges.rotation_degrees);
  p.zoom = rng.uniform(ranges.zoom_min, ranges.zoom_max);
  p.shear = rng.uniform(-ranges.shear, ranges.shear);
  p.reflect = rng.bernoulli(ranges.reflection_probability);
  return p;
}

Image apply_augment(const Image& image, const AugmentParams& params) {
  if (image.empty()) throw InvalidArgument("apply_augment: empty image");
  AffineOp::rotation(params.rotation_degrees).validate();
  AffineOp::zoom(params.zoom).validate();
  // Forward transform is shear * zoom * rotation, so its inverse applies the
  // inverse pieces in the opposite order.
  const Mat2 inv = multiply(inverse_rotation(params.rotation_degrees),
                            multiply(inverse_zoom(params.zoom), inverse_shear(params.shear)));
  Image out = resample(image, inv);
  if (params.reflect) out = reflect(out, Axis::Horizontal);
  return out;
}

Image random_augment(const Image& image, const AugmentRanges& ranges, std::uint64_t seed) {
  ranges.validate();
  Rng rng(seed);
  return apply_augment(image, sample_augment(ranges, rng));
}

}  // namespace styleforge::augment
