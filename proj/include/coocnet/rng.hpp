#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace coocnet {

// std::mt19937_64 output is fully specified by the standard; the distributions
// are not. Everything that must be reproducible across toolchains draws through
// the helpers below instead of <random> distributions.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for a named sub-stream, e.g. derive_seed(base, epoch).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Unbiased integer in [0, n). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Standard normal via Box-Muller (one draw per call).
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace coocnet
