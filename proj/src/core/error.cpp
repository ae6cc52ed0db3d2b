#include "coocnet/error.hpp"

namespace coocnet {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptImage: return "CorruptImage";
    case Errc::EncodeFailure: return "EncodeFailure";
    case Errc::InvalidSize: return "InvalidSize";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::OffsetTooLarge: return "OffsetTooLarge";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteActivation: return "NonFiniteActivation";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::IoError: return "IoError";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::EmptyManifest: return "EmptyManifest";
    case Errc::InvalidManifest: return "InvalidManifest";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::SingleCategory: return "SingleCategory";
    case Errc::EmptyDirectory: return "EmptyDirectory";
    case Errc::AmbiguousLabel: return "AmbiguousLabel";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace coocnet
