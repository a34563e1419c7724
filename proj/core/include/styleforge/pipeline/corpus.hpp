#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "styleforge/image.hpp"
#include "styleforge/pipeline/manifest.hpp"
#include "styleforge/sample.hpp"

namespace styleforge::pipeline {

struct CorpusShape {
  std::size_t per_class = 100;
  std::size_t height = 32;
  std::size_t width = 32;
};

/// One procedural RGB image. Benign images are smooth radial blobs; malignant
/// images have an irregular border filled with oriented stripes.
Image render_lesion(Label label, std::size_t height, std::size_t width, std::uint64_t seed);

/// Mean absolute 4-neighbour Laplacian of the luminance over interior pixels.
double laplacian_energy(const Image& image);

/// Renders 2 * per_class images into `root`/real/<class>/ and returns their
/// manifest. Paths in the manifest are relative to `root`. `text` is added to
/// every PNG.
DatasetManifest gen_corpus(const CorpusShape& shape, std::uint64_t seed, const std::filesystem::path& root,
                           const std::vector<PngText>& text = {});

/// Seeded choice of `per_class` real ids of each class, in manifest order.
std::vector<std::string> reserve_pool(const DatasetManifest& real, std::size_t per_class, std::uint64_t seed);

}  // namespace styleforge::pipeline
