#include "coocnet/cli.hpp"
#include "coocnet/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace coocnet::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(Errc::InvalidConfig, "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(Errc::InvalidConfig, "bad value '" + std::string(text) + "' for " + std::string(key));
}

}  // namespace

void set_option(RunConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_number<int>(key, value);
  } else if (key == "bins") {
    cfg.cooc.bins = parse_number<int>(key, value);
  } else if (key == "offset") {
    const auto parts = split_commas(value);
    if (parts.size() != 2) throw Error(Errc::InvalidConfig, "offset must be 'dy,dx'");
    cfg.cooc.offset = {parse_number<int>(key, parts[0]), parse_number<int>(key, parts[1])};
  } else if (key == "symmetric") {
    cfg.cooc.symmetric = parse_bool(key, value);
  } else if (key == "epochs") {
    cfg.epochs = parse_number<int>(key, value);
  } else if (key == "batch-size" || key == "batch_size") {
    cfg.batch_size = parse_number<int>(key, value);
  } else if (key == "lr") {
    cfg.learning_rate = parse_number<double>(key, value);
  } else if (key == "qualities") {
    cfg.qualities.clear();
    for (const auto part : split_commas(value)) cfg.qualities.push_back(parse_number<int>(key, part));
  } else {
    throw Error(Errc::InvalidConfig, "unknown option '" + std::string(key) + "'");
  }
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::InvalidConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_option(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(cfg, text.str());
}

void validate(const RunConfig& cfg) {
  cooc::validate(cfg.cooc);
  if (cfg.workers < 1) throw Error(Errc::InvalidConfig, "workers must be >= 1");
  if (cfg.epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be >= 1");
  if (cfg.batch_size < 1) throw Error(Errc::InvalidConfig, "batch-size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw Error(Errc::InvalidConfig, "lr must be > 0");
  if (cfg.cooc.bins < 8) throw Error(Errc::InvalidConfig, "the network needs bins >= 8");
  for (const int q : cfg.qualities) {
    if (q < 1 || q > 100) throw Error(Errc::InvalidConfig, "JPEG quality must be in [1, 100]");
  }
}

harness::TrainConfig train_config(const RunConfig& cfg) {
  harness::TrainConfig t;
  t.epochs = cfg.epochs;
  t.batch_size = cfg.batch_size;
  t.seed = cfg.seed;
  t.adam.learning_rate = cfg.learning_rate;
  t.cooc = cfg.cooc;
  t.workers = cfg.workers;
  return t;
}

net::NetworkSpec network_spec(const RunConfig& cfg) { return net::NetworkSpec::standard(cfg.cooc.bins); }

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["bins"] = cfg.cooc.bins;
  j["offset"] = {cfg.cooc.offset.dy, cfg.cooc.offset.dx};
  j["symmetric"] = cfg.cooc.symmetric;
  j["normalization"] = "max_one";
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.learning_rate;
  j["qualities"] = cfg.qualities;
  j["paths"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.paths) j["paths"][k] = v;
  return j;
}

}  // namespace coocnet::cli
