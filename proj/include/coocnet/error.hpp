#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coocnet {

enum class Errc {
  FileNotFound,
  UnsupportedFormat,
  CorruptImage,
  EncodeFailure,
  InvalidSize,
  InvalidConfig,
  OffsetTooLarge,
  ShapeMismatch,
  NonFiniteActivation,
  NonFiniteGradient,
  IoError,
  ChecksumMismatch,
  VersionMismatch,
  EmptyManifest,
  InvalidManifest,
  EmptySplit,
  SingleCategory,
  EmptyDirectory,
  AmbiguousLabel,
};

std::string_view to_string(Errc code) noexcept;

// Numerical failures abort training; everything else is a data or usage problem.
constexpr bool is_numerical(Errc code) noexcept {
  return code == Errc::NonFiniteActivation || code == Errc::NonFiniteGradient;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace coocnet
