#pragma once

#include <cstdint>

#include "styleforge/image.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::augment {

enum class AffineKind { Rotation, Zoom, Shear, Reflection };

/// Horizontal reflection mirrors columns (left <-> right); vertical mirrors
/// rows.
enum class Axis { Horizontal, Vertical };

/// A single geometric transform. `value` is degrees for rotation, the scale
/// factor for zoom and the horizontal shear factor for shear.
struct AffineOp {
  AffineKind kind = AffineKind::Rotation;
  double value = 0.0;
  Axis axis = Axis::Horizontal;

  static AffineOp rotation(double degrees) { return {AffineKind::Rotation, degrees, Axis::Horizontal}; }
  static AffineOp zoom(double factor) { return {AffineKind::Zoom, factor, Axis::Horizontal}; }
  static AffineOp shear(double factor) { return {AffineKind::Shear, factor, Axis::Horizontal}; }
  static AffineOp reflection(Axis axis) { return {AffineKind::Reflection, 0.0, axis}; }

  /// Rotation must lie in [-180, 180], zoom must be positive and finite.
  void validate() const;
};

/// Resamples about the image centre with bilinear interpolation; samples that
/// fall outside the source read as zero. Output keeps the input size.
Image apply_affine(const Image& image, const AffineOp& op);

/// Sampling ranges for stochastic augmentation. Rotation and shear are drawn
/// symmetric around zero.
struct AugmentRanges {
  double rotation_degrees = 20.0;
  double zoom_min = 0.9;
  double zoom_max = 1.1;
  double shear = 0.1;
  double reflection_probability = 0.5;

  static AugmentRanges identity() { return {0.0, 1.0, 1.0, 0.0, 0.0}; }

  void validate() const;
};

struct AugmentParams {
  double rotation_degrees = 0.0;
  double zoom = 1.0;
  double shear = 0.0;
  bool reflect = false;
};

/// Draws one parameter per kind, in the order rotation, zoom, shear, reflection.
AugmentParams sample_augment(const AugmentRanges& ranges, Rng& rng);

/// Rotation, then zoom, then shear as one resampling, then the optional
/// horizontal reflection.
Image apply_augment(const Image& image, const AugmentParams& params);

Image random_augment(const Image& image, const AugmentRanges& ranges, std::uint64_t seed);

}  // namespace styleforge::augment
