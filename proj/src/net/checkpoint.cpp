#include "coocnet/checkpoint.hpp"
#include "coocnet/error.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace coocnet::net {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'O', 'D', 'N'};
constexpr std::size_t kHeaderSize = 16;

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    put_bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  void get_floats(float* out, std::size_t n) { std::memcpy(out, take(n * sizeof(float)), n * sizeof(float)); }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw Error(Errc::IoError, "checkpoint record runs past the end of the file");
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  const auto layers = plan(checkpoint.spec);
  check_shapes(checkpoint.params, checkpoint.spec);

  Writer w;
  w.put_bytes(kMagic, 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(checkpoint.spec.bins));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(layers.size()));
  for (const auto& layer : layers) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(layer.spec.kind));
    if (!layer.spec.has_params()) {
      w.put<std::uint32_t>(0);
      continue;
    }
    const auto& weight = checkpoint.params.tensors[layer.weight_tensor];
    const auto& bias = checkpoint.params.tensors[layer.weight_tensor + 1];
    w.put<std::uint32_t>(static_cast<std::uint32_t>(weight.shape.size()));
    for (const auto d : weight.shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.put_bytes(weight.data.data(), weight.size() * sizeof(float));
    w.put_bytes(bias.data.data(), bias.size() * sizeof(float));
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(checkpoint.metadata.size()));
  for (const auto& [key, value] : checkpoint.metadata) {
    w.put_string(key);
    w.put_string(value);
  }
  w.put<std::uint32_t>(crc_of(w.bytes()));
  return std::move(w.bytes());
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes, std::optional<int> expected_bins) {
  if (bytes.size() < kHeaderSize + 4) throw Error(Errc::ChecksumMismatch, "checkpoint is truncated");
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body.size(), 4);
  if (crc_of(body) != stored_crc) throw Error(Errc::ChecksumMismatch, "checkpoint CRC does not match");

  Reader r(body);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>());
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::IoError, "not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(Errc::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                           std::to_string(kCheckpointVersion));
  }

  Checkpoint out;
  out.spec.bins = static_cast<int>(r.get<std::uint32_t>());
  if (expected_bins && *expected_bins != out.spec.bins) {
    throw Error(Errc::ShapeMismatch, "checkpoint was trained with " + std::to_string(out.spec.bins) +
                                         " bins, run expects " + std::to_string(*expected_bins));
  }
  const auto layer_count = r.get<std::uint32_t>();
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const auto tag = r.get<std::uint8_t>();
    if (tag < static_cast<std::uint8_t>(LayerKind::Conv) || tag > static_cast<std::uint8_t>(LayerKind::Sigmoid)) {
      throw Error(Errc::IoError, "unknown layer tag " + std::to_string(tag));
    }
    const auto kind = static_cast<LayerKind>(tag);
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = r.get<std::uint32_t>();

    LayerSpec layer{kind, 0, 0};
    if (kind == LayerKind::Conv) {
      if (rank != 4 || dims[2] != dims[3]) throw Error(Errc::ShapeMismatch, "conv weight must be [out, in, k, k]");
      layer = LayerSpec::conv(static_cast<int>(dims[0]), static_cast<int>(dims[2]));
    } else if (kind == LayerKind::Dense) {
      if (rank != 2) throw Error(Errc::ShapeMismatch, "dense weight must be [out, in]");
      layer = LayerSpec::dense(static_cast<int>(dims[0]));
    } else if (rank != 0) {
      throw Error(Errc::ShapeMismatch, to_string(kind) + " layer carries no parameters");
    }
    out.spec.layers.push_back(layer);

    if (layer.has_params()) {
      auto weight = Tensor<float>::zeros(dims);
      auto bias = Tensor<float>::zeros({dims[0]});
      r.get_floats(weight.data.data(), weight.size());
      r.get_floats(bias.data.data(), bias.size());
      out.params.tensors.push_back(std::move(weight));
      out.params.tensors.push_back(std::move(bias));
    }
  }
  const auto entries = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < entries; ++i) {
    auto key = r.get_string();
    out.metadata[std::move(key)] = r.get_string();
  }
  if (!r.done()) throw Error(Errc::IoError, "trailing bytes after checkpoint metadata");

  check_shapes(out.params, out.spec);
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<int> expected_bins) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open checkpoint: " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_checkpoint(bytes, expected_bins);
}

}  // namespace coocnet::net
