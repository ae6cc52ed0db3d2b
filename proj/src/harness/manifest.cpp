#include "coocnet/error.hpp"
#include "coocnet/manifest.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

namespace coocnet::harness {

namespace fs = std::filesystem;

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Unassigned: break;
  }
  return "unassigned";
}

std::optional<Split> parse_split(std::string_view s) noexcept {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  if (s == "unassigned") return Split::Unassigned;
  return std::nullopt;
}

std::vector<std::size_t> DatasetManifest::indices_of(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> DatasetManifest::all_indices() const {
  std::vector<std::size_t> out(records.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

void validate(const DatasetManifest& manifest) {
  std::unordered_set<std::string_view> seen;
  for (const auto& r : manifest.records) {
    if (r.path.empty()) throw Error(Errc::InvalidManifest, "record with empty path");
    if (r.category.empty()) throw Error(Errc::InvalidManifest, "record with empty category: " + r.path);
    if (!seen.insert(r.path).second) throw Error(Errc::InvalidManifest, "duplicate path: " + r.path);
  }
}

std::string to_jsonl(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& r : manifest.records) {
    nlohmann::ordered_json j;
    j["path"] = r.path;
    j["label"] = std::string(to_string(r.label));
    j["category"] = r.category;
    j["split"] = std::string(to_string(r.split));
    out += j.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest from_jsonl(std::string_view text) {
  DatasetManifest manifest;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    auto fail = [&](const std::string& why) {
      throw Error(Errc::InvalidManifest, "line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    if (!j.is_object() || !j.contains("path") || !j.contains("label") || !j.contains("category")) {
      fail("expected an object with path, label and category");
    }
    Record r;
    try {
      r.path = j.at("path").get<std::string>();
      r.category = j.at("category").get<std::string>();
      const auto label = parse_label(j.at("label").get<std::string>());
      if (!label) fail("label must be \"real\" or \"gan\"");
      r.label = *label;
      if (j.contains("split")) {
        const auto split = parse_split(j.at("split").get<std::string>());
        if (!split) fail("unknown split");
        r.split = *split;
      }
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    manifest.records.push_back(std::move(r));
  }
  validate(manifest);
  return manifest;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing: " + path.string());
  out << to_jsonl(manifest);
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return from_jsonl(text);
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::directory_entry> sorted_entries(const fs::path& dir) {
  std::vector<fs::directory_entry> entries(fs::directory_iterator(dir), fs::directory_iterator{});
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });
  return entries;
}

}  // namespace

DatasetManifest build_manifest(const fs::path& root, const LabelingRule& rule) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(Errc::FileNotFound, "not a directory: " + root.string());

  auto matches = [](const std::vector<std::string>& names, const std::string& name) {
    return std::find(names.begin(), names.end(), name) != names.end();
  };

  DatasetManifest manifest;
  for (const auto& label_dir : sorted_entries(root)) {
    if (!label_dir.is_directory()) continue;
    const std::string name = label_dir.path().filename().string();
    const bool is_real = matches(rule.real_names, name);
    const bool is_gan = matches(rule.gan_names, name);
    if (is_real == is_gan) {
      throw Error(Errc::AmbiguousLabel, "cannot map directory '" + name + "' to a single label");
    }
    const Label label = is_gan ? Label::Gan : Label::Real;
    for (const auto& category_dir : sorted_entries(label_dir.path())) {
      if (!category_dir.is_directory()) continue;
      const std::string category = category_dir.path().filename().string();
      for (const auto& file : sorted_entries(category_dir.path())) {
        if (!file.is_regular_file() || !is_image_file(file.path())) continue;
        manifest.records.push_back({file.path().generic_string(), label, category, Split::Unassigned});
      }
    }
  }
  if (manifest.empty()) throw Error(Errc::EmptyDirectory, "no images under " + root.string());
  std::sort(manifest.records.begin(), manifest.records.end(),
            [](const Record& a, const Record& b) { return a.path < b.path; });
  validate(manifest);
  return manifest;
}

std::vector<cooc::ImageRecord> image_records(const DatasetManifest& manifest, std::span<const std::size_t> indices) {
  std::vector<cooc::ImageRecord> out;
  out.reserve(indices.size());
  for (const auto i : indices) {
    const auto& r = manifest.records.at(i);
    out.push_back({r.path, r.label, r.category});
  }
  return out;
}

}  // namespace coocnet::harness
