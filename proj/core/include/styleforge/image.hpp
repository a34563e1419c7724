#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "styleforge/autodiff/tensor.hpp"

namespace styleforge {

/// H x W x C image with channel values nominally in [0, 1].
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
  Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> pixels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  double& at(std::size_t y, std::size_t x, std::size_t c) { return pixels_[(y * width_ + x) * channels_ + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels_[(y * width_ + x) * channels_ + c];
  }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  ad::Tensor to_tensor() const;
  static Image from_tensor(const ad::Tensor& tensor);

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> pixels_;
};

/// Clamps to [0, 1] and snaps every value to the nearest of 256 levels, the
/// exact values a PNG round trip yields.
Image quantize(const Image& image);

struct PngText {
  std::string key;
  std::string value;
  friend bool operator==(const PngText&, const PngText&) = default;
};

/// Writes an 8-bit RGB PNG (single-channel images are replicated to RGB).
/// Text entries become tEXt chunks. Output bytes are a pure function of the
/// inputs.
void write_png(const std::filesystem::path& path, const Image& image, const std::vector<PngText>& text = {});

/// Reads any PNG libpng understands and returns a 3-channel image in [0, 1].
Image read_png(const std::filesystem::path& path);

std::vector<PngText> read_png_text(const std::filesystem::path& path);

}  // namespace styleforge
