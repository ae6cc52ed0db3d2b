#pragma once

#include "coocnet/network.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace coocnet::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkSpec spec;
  ModelParams params;
  /// Free-form provenance (optimizer hyperparameters, co-occurrence settings,
  /// seed, ...), stored verbatim.
  std::map<std::string, std::string> metadata;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Little-endian layout:
///   "CODN", version u32, bins u32, layer count u32
///   per layer: kind u8, rank u32, dims u32 x rank, float32 payload
///              (weights then biases; rank 0 and no payload for
///              parameter-free layers)
///   metadata: entry count u32, then (u32 length + bytes) for key and value
///   CRC-32 of every preceding byte
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Errors: IoError (missing/unreadable/malformed), ChecksumMismatch
/// (truncated or corrupted), VersionMismatch, ShapeMismatch (parameter shapes
/// inconsistent, or bins differ from `expected_bins`).
Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<int> expected_bins = std::nullopt);

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes, std::optional<int> expected_bins = std::nullopt);

}  // namespace coocnet::net
