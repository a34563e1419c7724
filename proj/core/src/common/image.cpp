#include "styleforge/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "styleforge/error.hpp"

namespace styleforge {

Image::Image(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels), pixels_(height * width * channels, fill) {}

Image::Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> pixels)
    : height_(height), width_(width), channels_(channels), pixels_(std::move(pixels)) {
  if (pixels_.size() != height * width * channels) {
    throw ShapeError("image " + std::to_string(height) + "x" + std::to_string(width) + "x" +
                     std::to_string(channels) + " needs " + std::to_string(height * width * channels) +
                     " values, got " + std::to_string(pixels_.size()));
  }
}

ad::Tensor Image::to_tensor() const {
  return ad::Tensor({height_, width_, channels_}, pixels_);
}

Image Image::from_tensor(const ad::Tensor& tensor) {
  if (tensor.rank() != 3) throw ShapeError("image tensor must be H x W x C, got " + ad::shape_string(tensor.shape()));
  return Image(tensor.dim(0), tensor.dim(1), tensor.dim(2), tensor.values());
}

namespace {

std::uint8_t to_byte(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes->size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cursor->bytes->data() + cursor->offset, length);
  cursor->offset += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_callback(png_structp) {}

struct Decoded {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;
  std::vector<PngText> text;
  std::vector<png_bytep> rows;
};

// Keeps every non-trivial C++ object outside the setjmp frame.
bool decode(const std::vector<std::uint8_t>& bytes, Decoded& out, bool pixels, std::string& error) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    error = "not a PNG file";
    return false;
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    error = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  ReadCursor cursor{&bytes, 0};
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    error = "corrupt PNG data";
    return false;
  }
  png_set_read_fn(png, &cursor, read_callback);
  png_read_info(png, info);

  png_textp text_ptr = nullptr;
  int num_text = 0;
  png_get_text(png, info, &text_ptr, &num_text);
  for (int i = 0; i < num_text; ++i) out.text.push_back({text_ptr[i].key, text_ptr[i].text});

  if (pixels) {
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.rgb.assign(out.height * stride, 0);
    out.rows.resize(out.height);
    for (std::size_t y = 0; y < out.height; ++y) out.rows[y] = out.rgb.data() + y * stride;
    png_read_image(png, out.rows.data());
    png_read_end(png, nullptr);
    if (stride != out.width * 3) {
      png_destroy_read_struct(&png, &info, nullptr);
      error = "unsupported PNG layout";
      return false;
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

struct EncodeBuffers {
  std::vector<png_bytep> rows;
  std::vector<png_text> chunks;
};

// Pointer tables live in caller-owned buffers so nothing automatic is
// modified between setjmp and a possible longjmp.
bool encode(std::size_t width, std::size_t height,
            const std::vector<PngText>& text, EncodeBuffers& buffers, std::vector<std::uint8_t>& out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  if (!text.empty()) {
    png_set_text(png, info, buffers.chunks.data(), static_cast<int>(buffers.chunks.size()));
  }
  png_write_info(png, info);
  png_write_image(png, buffers.rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Image quantize(const Image& image) {
  Image out = image;
  for (auto& v : out.pixels()) v = to_byte(v) / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image, const std::vector<PngText>& text) {
  if (image.empty()) throw InvalidArgument("write_png: empty image");
  if (image.channels() != 1 && image.channels() != 3) {
    throw InvalidArgument("write_png: need 1 or 3 channels, got " + std::to_string(image.channels()));
  }
  std::vector<std::uint8_t> rgb(image.height() * image.width() * 3);
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t src = image.channels() == 3 ? c : 0;
        rgb[(y * image.width() + x) * 3 + c] = to_byte(image.at(y, x, src));
      }
    }
  }
  EncodeBuffers buffers;
  for (std::size_t y = 0; y < image.height(); ++y) buffers.rows.push_back(rgb.data() + y * image.width() * 3);
  for (const auto& entry : text) {
    png_text chunk;
    std::memset(&chunk, 0, sizeof(chunk));
    chunk.compression = PNG_TEXT_COMPRESSION_NONE;
    chunk.key = const_cast<char*>(entry.key.c_str());
    chunk.text = const_cast<char*>(entry.value.c_str());
    chunk.text_length = entry.value.size();
    buffers.chunks.push_back(chunk);
  }
  std::vector<std::uint8_t> bytes;
  if (!encode(image.width(), image.height(), text, buffers, bytes)) throw IoError("PNG encoding failed for " + path.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  Decoded decoded;
  std::string error;
  if (!decode(bytes, decoded, true, error)) throw IoError(path.string() + ": " + error);
  std::vector<double> pixels(decoded.rgb.size());
  std::transform(decoded.rgb.begin(), decoded.rgb.end(), pixels.begin(), [](std::uint8_t b) { return b / 255.0; });
  return Image(decoded.height, decoded.width, 3, std::move(pixels));
}

std::vector<PngText> read_png_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  Decoded decoded;
  std::string error;
  if (!decode(bytes, decoded, false, error)) throw IoError(path.string() + ": " + error);
  return decoded.text;
}

}  // namespace styleforge
