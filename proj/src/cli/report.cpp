#include "coocnet/cli.hpp"
#include "coocnet/error.hpp"
#include "coocnet/imaging.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>

#ifndef COOCNET_VERSION
#define COOCNET_VERSION "unknown"
#endif

namespace coocnet::cli {

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

nlohmann::ordered_json run_metadata(std::string_view command, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = std::string(command);
  j["version"] = COOCNET_VERSION;
  j["seed"] = cfg.seed;
  j["config"] = to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["codec"] = imaging::jpeg_codec_identity();
  j["network"] = cfg.cooc.bins >= 8 ? net::describe(network_spec(cfg)) : std::string();
  return j;
}

std::map<std::string, std::string> checkpoint_metadata(const RunConfig& cfg) {
  return {
      {"cooc.offset", std::to_string(cfg.cooc.offset.dy) + "," + std::to_string(cfg.cooc.offset.dx)},
      {"cooc.symmetric", cfg.cooc.symmetric ? "true" : "false"},
      {"cooc.normalization", "max_one"},
      {"train.seed", std::to_string(cfg.seed)},
      {"train.epochs", std::to_string(cfg.epochs)},
      {"train.batch_size", std::to_string(cfg.batch_size)},
      {"adam.lr", nlohmann::json(cfg.learning_rate).dump()},
      {"config_hash", config_hash(cfg)},
      {"version", COOCNET_VERSION},
  };
}

cooc::CoOccConfig cooc_from_metadata(const std::map<std::string, std::string>& metadata, int bins) {
  RunConfig cfg;
  cfg.cooc.bins = bins;
  if (const auto it = metadata.find("cooc.offset"); it != metadata.end()) set_option(cfg, "offset", it->second);
  if (const auto it = metadata.find("cooc.symmetric"); it != metadata.end()) set_option(cfg, "symmetric", it->second);
  cooc::validate(cfg.cooc);
  return cfg.cooc;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& json) {
  write_text(path, json.dump(2) + "\n");
}

}  // namespace coocnet::cli
