#pragma once

#include "coocnet/trainer.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coocnet::cli {

/// Fully resolved settings for one command. Built from defaults, then an
/// optional `key = value` config file, then command-line flags.
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  cooc::CoOccConfig cooc;
  int epochs = 50;
  int batch_size = 40;
  double learning_rate = 1e-4;
  std::vector<int> qualities{95, 85, 75};
  /// Input and output paths of the command, recorded for provenance.
  std::map<std::string, std::string> paths;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Keys accepted in config files and as --flags: seed, workers, bins, offset
/// ("dy,dx"), symmetric, epochs, batch-size, lr, qualities ("95,85,75").
/// Throws Error(InvalidConfig) for an unknown key or a malformed value.
void set_option(RunConfig& cfg, std::string_view key, std::string_view value);

/// Lines of `key = value`; blank lines and lines starting with '#' are skipped.
void apply_config_text(RunConfig& cfg, std::string_view text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Checks every field; throws Error(InvalidConfig).
void validate(const RunConfig& cfg);

harness::TrainConfig train_config(const RunConfig& cfg);
net::NetworkSpec network_spec(const RunConfig& cfg);

nlohmann::ordered_json to_json(const RunConfig& cfg);

/// CRC-32 of the compact JSON form of the config, as 8 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Provenance block attached to every output: command, config, seed, tool
/// version, JPEG codec identity, config hash and network layout.
nlohmann::ordered_json run_metadata(std::string_view command, const RunConfig& cfg);

/// Checkpoint metadata entries that let eval/predict rebuild the feature
/// extractor, and the inverse.
std::map<std::string, std::string> checkpoint_metadata(const RunConfig& cfg);
cooc::CoOccConfig cooc_from_metadata(const std::map<std::string, std::string>& metadata, int bins);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& json);
void write_text(const std::filesystem::path& path, std::string_view text);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the `coocnet` tool. Returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace coocnet::cli
