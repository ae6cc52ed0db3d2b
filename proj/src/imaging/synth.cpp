#include "coocnet/error.hpp"
#include "coocnet/imaging.hpp"
#include "coocnet/rng.hpp"

#include <algorithm>
#include <cmath>

namespace coocnet::imaging {

namespace {

constexpr int kUpsample = 4;

std::uint8_t random_byte(Rng& rng) { return static_cast<std::uint8_t>(rng() >> 56); }

PixelImage make_noisy(Rng& rng, int width, int height) {
  PixelImage img(width, height);
  for (auto& v : img.data()) v = random_byte(rng);
  return img;
}

// Half-pixel-centred bilinear upsampling with edge clamping, then crop.
PixelImage make_smooth(Rng& rng, int width, int height) {
  const int sw = (width + kUpsample - 1) / kUpsample;
  const int sh = (height + kUpsample - 1) / kUpsample;
  PixelImage small(sw, sh);
  for (auto& v : small.data()) v = random_byte(rng);

  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int n_out, int n_in) {
    std::vector<Tap> out(static_cast<std::size_t>(n_out));
    for (int o = 0; o < n_out; ++o) {
      const double src = (o + 0.5) / kUpsample - 0.5;
      const double fl = std::floor(src);
      const int i = static_cast<int>(fl);
      out[o] = {std::clamp(i, 0, n_in - 1), std::clamp(i + 1, 0, n_in - 1), src - fl};
    }
    return out;
  };
  const auto xs = taps(width, sw);
  const auto ys = taps(height, sh);

  PixelImage img(width, height);
  for (int y = 0; y < height; ++y) {
    const Tap ty = ys[y];
    for (int x = 0; x < width; ++x) {
      const Tap tx = xs[x];
      for (int c = 0; c < PixelImage::kChannels; ++c) {
        const double top = small.at(ty.i0, tx.i0, c) * (1 - tx.frac) + small.at(ty.i0, tx.i1, c) * tx.frac;
        const double bot = small.at(ty.i1, tx.i0, c) * (1 - tx.frac) + small.at(ty.i1, tx.i1, c) * tx.frac;
        const double v = top * (1 - ty.frac) + bot * ty.frac;
        img.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return img;
}

}  // namespace

std::string_view to_string(SynthClass cls) noexcept {
  return cls == SynthClass::Smooth ? "smooth" : "noisy";
}

PixelImage synth_sample(SynthClass cls, std::uint64_t seed, int width, int height) {
  if (width < 8 || height < 8) {
    throw Error(Errc::InvalidSize, "synthetic samples need width and height >= 8");
  }
  Rng rng(derive_seed(seed, cls == SynthClass::Smooth ? 1 : 2));
  return cls == SynthClass::Smooth ? make_smooth(rng, width, height) : make_noisy(rng, width, height);
}

}  // namespace coocnet::imaging
