#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coocnet::imaging {

/// Interleaved 8-bit RGB raster, row-major.
class PixelImage {
 public:
  static constexpr int kChannels = 3;

  PixelImage() = default;
  /// Zero-filled image. Throws Error(InvalidSize) for non-positive dimensions.
  PixelImage(int width, int height);
  /// Takes ownership of `data`; its length must be width*height*3.
  PixelImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t at(int y, int x, int c) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  std::uint8_t& at(int y, int x, int c) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const PixelImage&, const PixelImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class ImageFormat { Png, Jpeg };

/// Decodes a PNG or baseline JPEG; the format is sniffed from the file
/// signature. Grayscale and paletted inputs are promoted to RGB, alpha is
/// discarded without compositing.
PixelImage load_image(const std::filesystem::path& path);

/// Writes PNG or JPEG depending on the extension (.png, .jpg, .jpeg).
/// `jpeg_quality` only applies to JPEG output.
void save_image(const std::filesystem::path& path, const PixelImage& img, int jpeg_quality = 95);

std::vector<std::uint8_t> encode_png(const PixelImage& img);
PixelImage decode_png(std::span<const std::uint8_t> bytes);

/// Baseline sequential JPEG, 4:2:0 chroma, Annex K tables scaled with the
/// libjpeg quality mapping.
std::vector<std::uint8_t> encode_jpeg(const PixelImage& img, int quality);
PixelImage decode_jpeg(std::span<const std::uint8_t> bytes);

/// decode(encode_jpeg(img, quality)). quality must be in [1, 100].
PixelImage jpeg_recompress(const PixelImage& img, int quality);

/// Identity of the JPEG codec, recorded in run metadata.
std::string jpeg_codec_identity();

enum class SynthClass { Smooth, Noisy };

std::string_view to_string(SynthClass cls) noexcept;

/// Deterministic synthetic sample. `Smooth` is a (w/4)x(h/4) uniform-random
/// raster bilinearly upsampled 4x and cropped; `Noisy` is i.i.d. uniform
/// noise per pixel and channel. Width and height must both be >= 8.
PixelImage synth_sample(SynthClass cls, std::uint64_t seed, int width, int height);

}  // namespace coocnet::imaging
