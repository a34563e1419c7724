#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "styleforge/image.hpp"

namespace styleforge {

/// Two-class problem: the smooth-blob class and the textured class.
enum class Label : std::size_t { Benign = 0, Malignant = 1 };

inline constexpr std::size_t kNumClasses = 2;

inline std::size_t label_index(Label label) { return static_cast<std::size_t>(label); }

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

/// An image with a (real or pseudo) class label, ready for training.
struct Sample {
  std::string id;
  Image image;
  Label label = Label::Benign;
};

}  // namespace styleforge
