#include "styleforge/sample.hpp"

namespace styleforge {

std::string_view label_name(Label label) { return label == Label::Benign ? "benign" : "malignant"; }

std::optional<Label> parse_label(std::string_view name) {
  if (name == "benign") return Label::Benign;
  if (name == "malignant") return Label::Malignant;
  return std::nullopt;
}

}  // namespace styleforge
