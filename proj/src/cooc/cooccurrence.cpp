#include "coocnet/cooc.hpp"
#include "coocnet/error.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <numeric>
#include <string>

namespace coocnet::cooc {

void validate(const CoOccConfig& cfg) {
  if (cfg.offset.dy == 0 && cfg.offset.dx == 0) {
    throw Error(Errc::InvalidConfig, "co-occurrence offset must not be (0,0)");
  }
  if (cfg.bins < 2 || cfg.bins > 256 || !std::has_single_bit(static_cast<unsigned>(cfg.bins))) {
    throw Error(Errc::InvalidConfig, "bins must be a power of two in [2, 256], got " + std::to_string(cfg.bins));
  }
}

ChannelView ChannelView::of(const imaging::PixelImage& img, int channel) {
  return ChannelView{img.data().data() + channel, img.height(), img.width(), imaging::PixelImage::kChannels,
                     static_cast<std::ptrdiff_t>(img.width()) * imaging::PixelImage::kChannels};
}

ChannelView ChannelView::dense(std::span<const std::uint8_t> data, int height, int width) {
  if (data.size() != static_cast<std::size_t>(height) * width) {
    throw Error(Errc::InvalidSize, "channel buffer length does not match height*width");
  }
  return ChannelView{data.data(), height, width, 1, width};
}

std::uint64_t CountMatrix::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t expected_pair_count(int height, int width, const CoOccConfig& cfg) noexcept {
  const auto rows = static_cast<std::int64_t>(height) - std::abs(cfg.offset.dy);
  const auto cols = static_cast<std::int64_t>(width) - std::abs(cfg.offset.dx);
  if (rows <= 0 || cols <= 0) return 0;
  return static_cast<std::uint64_t>(rows * cols) * (cfg.symmetric ? 2 : 1);
}

CountMatrix cooccur_channel(const ChannelView& channel, const CoOccConfig& cfg) {
  validate(cfg);
  const int dy = cfg.offset.dy;
  const int dx = cfg.offset.dx;
  if (std::abs(dy) >= channel.height || std::abs(dx) >= channel.width) {
    throw Error(Errc::OffsetTooLarge, "offset (" + std::to_string(dy) + "," + std::to_string(dx) +
                                          ") does not fit a " + std::to_string(channel.height) + "x" +
                                          std::to_string(channel.width) + " channel");
  }

  const int bins = cfg.bins;
  const int shift = std::countr_zero(static_cast<unsigned>(256 / bins));
  CountMatrix out{bins, std::vector<std::uint64_t>(static_cast<std::size_t>(bins) * bins, 0)};
  std::uint64_t* counts = out.counts.data();

  const int y_begin = std::max(0, -dy);
  const int y_end = std::min(channel.height, channel.height - dy);
  const int x_begin = std::max(0, -dx);
  const int x_end = std::min(channel.width, channel.width - dx);
  const std::ptrdiff_t step = channel.pixel_stride;
  const std::ptrdiff_t partner = dy * channel.row_stride + dx * step;

  for (int y = y_begin; y < y_end; ++y) {
    const std::uint8_t* p = channel.base + y * channel.row_stride + x_begin * step;
    for (int x = x_begin; x < x_end; ++x, p += step) {
      const unsigned a = p[0] >> shift;
      const unsigned b = p[partner] >> shift;
      ++counts[a * bins + b];
      if (cfg.symmetric) ++counts[b * bins + a];
    }
  }
  return out;
}

std::array<CountMatrix, 3> cooccur_counts(const imaging::PixelImage& img, const CoOccConfig& cfg) {
  if (img.empty()) throw Error(Errc::InvalidSize, "empty image");
  return {cooccur_channel(ChannelView::of(img, 0), cfg), cooccur_channel(ChannelView::of(img, 1), cfg),
          cooccur_channel(ChannelView::of(img, 2), cfg)};
}

CoOccurrenceTensor normalize(const std::array<CountMatrix, 3>& counts, Normalization mode) {
  const int bins = counts[0].bins;
  const std::size_t plane = static_cast<std::size_t>(bins) * bins;
  CoOccurrenceTensor out{bins, std::vector<float>(3 * plane, 0.0f)};
  switch (mode) {
    case Normalization::MaxOne:
      for (std::size_t c = 0; c < 3; ++c) {
        const auto& m = counts[c].counts;
        const std::uint64_t peak = *std::max_element(m.begin(), m.end());
        if (peak == 0) continue;
        const double scale = static_cast<double>(peak);
        float* dst = out.data.data() + c * plane;
        for (std::size_t k = 0; k < plane; ++k) dst[k] = static_cast<float>(static_cast<double>(m[k]) / scale);
      }
      break;
  }
  return out;
}

CoOccurrenceTensor cooccur_tensor(const imaging::PixelImage& img, const CoOccConfig& cfg) {
  return normalize(cooccur_counts(img, cfg), cfg.normalization);
}

}  // namespace coocnet::cooc
