#pragma once

#include "coocnet/manifest.hpp"

#include <cstdint>

namespace coocnet::harness {

struct SplitRatios {
  double train = 0.50;
  double val = 0.25;
  double test = 0.25;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// train = floor(n * r_train), val = floor(n * r_val), test gets the remainder.
SplitCounts split_counts(std::size_t n, const SplitRatios& ratios);

/// Seeded, label-stratified assignment of every record to train/val/test.
/// Each label group is shuffled independently, the groups are interleaved
/// proportionally, and the interleaved sequence is cut at the split counts,
/// so every split holds each label within one example of its global share.
/// Throws EmptyManifest, or InvalidConfig if the ratios do not sum to 1.
DatasetManifest split_dataset(DatasetManifest manifest, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace coocnet::harness
