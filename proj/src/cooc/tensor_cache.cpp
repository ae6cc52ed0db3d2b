#include "coocnet/cooc.hpp"
#include "coocnet/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace coocnet::cooc {

namespace {

constexpr char kMagic[4] = {'C', 'O', 'O', 'C'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 4 + 4 + 1;

static_assert(std::endian::native == std::endian::little, "tensor cache I/O assumes a little-endian host");

template <typename T>
void put(std::vector<char>& out, T value) {
  const auto* p = reinterpret_cast<const char*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<char>& in, std::size_t& pos) {
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

void write_tensor_cache(const std::filesystem::path& path, const CoOccurrenceTensor& tensor,
                        const CoOccConfig& cfg) {
  if (tensor.bins != cfg.bins || tensor.size() != 3u * tensor.bins * tensor.bins) {
    throw Error(Errc::ShapeMismatch, "tensor shape does not match configuration");
  }
  std::vector<char> out;
  out.reserve(kHeaderSize + tensor.size() * sizeof(float));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kTensorCacheVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.bins));
  put<std::int32_t>(out, cfg.offset.dy);
  put<std::int32_t>(out, cfg.offset.dx);
  put<std::uint8_t>(out, cfg.symmetric ? 1 : 0);
  const auto* payload = reinterpret_cast<const char*>(tensor.data.data());
  out.insert(out.end(), payload, payload + tensor.size() * sizeof(float));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(Errc::IoError, "cannot open for writing: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(Errc::IoError, "write failed: " + path.string());
}

CachedTensor read_tensor_cache(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(Errc::FileNotFound, path.string());
  const std::vector<char> in{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
  if (in.size() < kHeaderSize || std::memcmp(in.data(), kMagic, 4) != 0) {
    throw Error(Errc::IoError, "not a tensor cache file: " + path.string());
  }
  std::size_t pos = 4;
  if (get<std::uint32_t>(in, pos) != kTensorCacheVersion) {
    throw Error(Errc::VersionMismatch, "unsupported tensor cache version: " + path.string());
  }
  CachedTensor out;
  const auto bins = get<std::uint32_t>(in, pos);
  out.offset.dy = get<std::int32_t>(in, pos);
  out.offset.dx = get<std::int32_t>(in, pos);
  out.symmetric = get<std::uint8_t>(in, pos) != 0;
  if (bins < 2 || bins > 256) throw Error(Errc::IoError, "bad bin count in " + path.string());
  const std::size_t count = 3u * bins * bins;
  if (in.size() != kHeaderSize + count * sizeof(float)) {
    throw Error(Errc::IoError, "truncated tensor cache file: " + path.string());
  }
  out.tensor.bins = static_cast<int>(bins);
  out.tensor.data.resize(count);
  std::memcpy(out.tensor.data.data(), in.data() + pos, count * sizeof(float));
  return out;
}

}  // namespace coocnet::cooc
