#include "coocnet/error.hpp"
#include "coocnet/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

namespace coocnet::imaging {

PixelImage::PixelImage(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(Errc::InvalidSize, "image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * height * kChannels, 0);
}

PixelImage::PixelImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw Error(Errc::InvalidSize, "image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * kChannels) {
    throw Error(Errc::InvalidSize, "pixel buffer length does not match width*height*3");
  }
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return ImageFormat::Png;
  if (ext == ".jpg" || ext == ".jpeg") return ImageFormat::Jpeg;
  throw Error(Errc::UnsupportedFormat, "unknown image extension: " + path.string());
}

bool has_png_signature(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return b.size() >= 8 && std::equal(std::begin(kSig), std::end(kSig), b.begin());
}

bool has_jpeg_signature(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff;
}

}  // namespace

PixelImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    if (has_png_signature(bytes)) return decode_png(bytes);
    if (has_jpeg_signature(bytes)) return decode_jpeg(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  throw Error(Errc::UnsupportedFormat, path.string() + " is neither PNG nor JPEG");
}

void save_image(const std::filesystem::path& path, const PixelImage& img, int jpeg_quality) {
  const auto bytes = format_from_extension(path) == ImageFormat::Png ? encode_png(img)
                                                                     : encode_jpeg(img, jpeg_quality);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

PixelImage jpeg_recompress(const PixelImage& img, int quality) {
  return decode_jpeg(encode_jpeg(img, quality));
}

}  // namespace coocnet::imaging
