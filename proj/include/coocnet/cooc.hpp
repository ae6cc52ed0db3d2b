#pragma once

#include "coocnet/imaging.hpp"
#include "coocnet/label.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coocnet::cooc {

struct Offset {
  int dy = 0;
  int dx = 1;
  friend bool operator==(const Offset&, const Offset&) = default;
};

enum class Normalization { MaxOne };

struct CoOccConfig {
  Offset offset{0, 1};
  bool symmetric = false;
  int bins = 256;
  Normalization normalization = Normalization::MaxOne;

  friend bool operator==(const CoOccConfig&, const CoOccConfig&) = default;
};

/// Throws Error(InvalidConfig) for a zero offset or a bin count that is not a
/// power-of-two divisor of 256 in [2, 256].
void validate(const CoOccConfig& cfg);

/// Intensity -> bin, i.e. floor(i * bins / 256).
constexpr int bin_of(std::uint8_t intensity, int bins) noexcept {
  return intensity * bins / 256;
}

/// Read-only view of one channel of an interleaved raster.
struct ChannelView {
  const std::uint8_t* base = nullptr;
  int height = 0;
  int width = 0;
  std::ptrdiff_t pixel_stride = 1;  // elements between horizontal neighbours
  std::ptrdiff_t row_stride = 0;    // elements between vertical neighbours

  std::uint8_t at(int y, int x) const noexcept { return base[y * row_stride + x * pixel_stride]; }

  static ChannelView of(const imaging::PixelImage& img, int channel);
  static ChannelView dense(std::span<const std::uint8_t> data, int height, int width);
};

/// bins x bins matrix of exact pair counts, row index = bin of the reference
/// pixel, column index = bin of the pixel at reference + offset.
struct CountMatrix {
  int bins = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(int i, int j) const noexcept { return counts[static_cast<std::size_t>(i) * bins + j]; }
  std::uint64_t total() const noexcept;

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;
};

/// Number of pixel pairs a channel of the given size contributes.
std::uint64_t expected_pair_count(int height, int width, const CoOccConfig& cfg) noexcept;

/// Throws Error(OffsetTooLarge) if the offset does not fit the image.
CountMatrix cooccur_channel(const ChannelView& channel, const CoOccConfig& cfg);

/// Raw R, G, B count matrices.
std::array<CountMatrix, 3> cooccur_counts(const imaging::PixelImage& img, const CoOccConfig& cfg);

/// 3 x B x B float tensor, channel-major (R, G, B).
struct CoOccurrenceTensor {
  int bins = 0;
  std::vector<float> data;

  std::size_t size() const noexcept { return data.size(); }
  float at(int channel, int i, int j) const noexcept {
    return data[(static_cast<std::size_t>(channel) * bins + i) * bins + j];
  }

  friend bool operator==(const CoOccurrenceTensor&, const CoOccurrenceTensor&) = default;
};

/// Each channel divided by its own maximum count; an all-zero channel stays zero.
CoOccurrenceTensor normalize(const std::array<CountMatrix, 3>& counts, Normalization mode);

CoOccurrenceTensor cooccur_tensor(const imaging::PixelImage& img, const CoOccConfig& cfg);

// ---------------------------------------------------------------------------
// Batch extraction

struct ImageRecord {
  std::string path;
  Label label = Label::Real;
  std::string category;
};

struct ExtractOptions {
  int workers = 1;
  /// When set, every image goes through jpeg_recompress at this quality
  /// before extraction.
  std::optional<int> jpeg_quality;
};

struct ExtractedSample {
  std::size_t record_index = 0;  // position in the input list
  CoOccurrenceTensor tensor;
  Label label = Label::Real;
};

struct ExtractFailure {
  std::size_t record_index = 0;
  std::string path;
  std::string message;
};

struct BatchResult {
  std::vector<ExtractedSample> samples;  // input order, failures skipped
  std::vector<ExtractFailure> failures;  // input order
};

/// Order-preserving and independent of the worker count. Per-image failures
/// are collected, never thrown; configuration errors are thrown.
BatchResult batch_extract(std::span<const ImageRecord> records, const CoOccConfig& cfg,
                          const ExtractOptions& options = {});

// ---------------------------------------------------------------------------
// On-disk tensor cache: "COOC", version u32, bins u32, dy i32, dx i32,
// symmetric u8, then 3*B*B little-endian float32, channel-major.

inline constexpr std::uint32_t kTensorCacheVersion = 1;

void write_tensor_cache(const std::filesystem::path& path, const CoOccurrenceTensor& tensor,
                        const CoOccConfig& cfg);

struct CachedTensor {
  CoOccurrenceTensor tensor;
  Offset offset;
  bool symmetric = false;
};

CachedTensor read_tensor_cache(const std::filesystem::path& path);

}  // namespace coocnet::cooc
