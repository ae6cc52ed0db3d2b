#include "coocnet/error.hpp"
#include "coocnet/imaging.hpp"

#include <png.h>

#include <cstring>

namespace coocnet::imaging {

namespace {

// png_image owns internal state until finish_read/free; this guard makes early
// exits release it.
struct PngImageGuard {
  png_image image;
  PngImageGuard() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
  PngImageGuard(const PngImageGuard&) = delete;
  PngImageGuard& operator=(const PngImageGuard&) = delete;
};

}  // namespace

PixelImage decode_png(std::span<const std::uint8_t> bytes) {
  PngImageGuard guard;
  png_image& image = guard.image;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(Errc::CorruptImage, std::string("png header: ") + image.message);
  }
  // Read as RGBA so that alpha is carried through untouched and then dropped;
  // asking libpng for RGB would composite against a background instead.
  image.format = PNG_FORMAT_RGBA;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  if (width <= 0 || height <= 0) throw Error(Errc::CorruptImage, "png has zero size");

  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    throw Error(Errc::CorruptImage, std::string("png data: ") + image.message);
  }

  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> rgb(pixels * 3);
  for (std::size_t i = 0; i < pixels; ++i) {
    rgb[3 * i + 0] = rgba[4 * i + 0];
    rgb[3 * i + 1] = rgba[4 * i + 1];
    rgb[3 * i + 2] = rgba[4 * i + 2];
  }
  return PixelImage(width, height, std::move(rgb));
}

std::vector<std::uint8_t> encode_png(const PixelImage& img) {
  if (img.empty()) throw Error(Errc::EncodeFailure, "cannot encode an empty image");
  PngImageGuard guard;
  png_image& image = guard.image;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr)) {
    throw Error(Errc::EncodeFailure, std::string("png size query: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
    throw Error(Errc::EncodeFailure, std::string("png write: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace coocnet::imaging
