#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace coocnet {

/// Binary class. `Gan` is the positive class (network target 1).
enum class Label : std::uint8_t { Real = 0, Gan = 1 };

constexpr std::string_view to_string(Label label) noexcept {
  return label == Label::Gan ? "gan" : "real";
}

constexpr std::optional<Label> parse_label(std::string_view s) noexcept {
  if (s == "real") return Label::Real;
  if (s == "gan") return Label::Gan;
  return std::nullopt;
}

constexpr int target_of(Label label) noexcept { return label == Label::Gan ? 1 : 0; }

}  // namespace coocnet
