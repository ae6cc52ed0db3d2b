#include "coocnet/error.hpp"
#include "coocnet/rng.hpp"
#include "coocnet/split.hpp"

#include <cmath>

namespace coocnet::harness {

namespace {

std::size_t floor_share(std::size_t n, double ratio) {
  // Tolerance keeps exact products such as 36302 * 0.5 from flooring down.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
}

}  // namespace

SplitCounts split_counts(std::size_t n, const SplitRatios& ratios) {
  const std::size_t train = floor_share(n, ratios.train);
  const std::size_t val = std::min(n - train, floor_share(n, ratios.val));
  return {train, val, n - train - val};
}

DatasetManifest split_dataset(DatasetManifest manifest, const SplitRatios& ratios, std::uint64_t seed) {
  if (manifest.empty()) throw Error(Errc::EmptyManifest, "cannot split an empty manifest");
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error(Errc::InvalidConfig, "split ratios must be non-negative and sum to 1");
  }

  std::vector<std::size_t> real, gan;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    (manifest.records[i].label == Label::Gan ? gan : real).push_back(i);
  }
  Rng real_rng(derive_seed(seed, 0x5e41));
  Rng gan_rng(derive_seed(seed, 0x5e42));
  shuffle(std::span(real), real_rng);
  shuffle(std::span(gan), gan_rng);

  // Merge by fractional rank (2i+1)/(2n): element i of a group of size n sits
  // at the middle of its 1/n-wide slot. Cross-multiplied to stay exact; ties
  // go to the real group.
  std::vector<std::size_t> order;
  order.reserve(manifest.size());
  std::size_t a = 0, b = 0;
  const std::uint64_t nr = real.size(), ng = gan.size();
  while (a < nr || b < ng) {
    const bool take_real = b == ng || (a < nr && (2 * a + 1) * ng <= (2 * b + 1) * nr);
    order.push_back(take_real ? real[a++] : gan[b++]);
  }

  const auto counts = split_counts(manifest.size(), ratios);
  for (std::size_t k = 0; k < order.size(); ++k) {
    Split s = Split::Test;
    if (k < counts.train) {
      s = Split::Train;
    } else if (k < counts.train + counts.val) {
      s = Split::Val;
    }
    manifest.records[order[k]].split = s;
  }
  return manifest;
}

}  // namespace coocnet::harness
