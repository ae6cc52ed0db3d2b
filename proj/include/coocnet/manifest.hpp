#pragma once

#include "coocnet/cooc.hpp"
#include "coocnet/label.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coocnet::harness {

enum class Split : std::uint8_t { Unassigned, Train, Val, Test };

std::string_view to_string(Split split) noexcept;
std::optional<Split> parse_split(std::string_view s) noexcept;

struct Record {
  std::string path;
  Label label = Label::Real;
  std::string category;
  Split split = Split::Unassigned;

  friend bool operator==(const Record&, const Record&) = default;
};

struct DatasetManifest {
  std::vector<Record> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  std::vector<std::size_t> indices_of(Split split) const;
  std::vector<std::size_t> all_indices() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Throws Error(InvalidManifest) on duplicate paths or empty path/category.
void validate(const DatasetManifest& manifest);

/// JSON Lines, one {"path","label","category","split"} object per record.
std::string to_jsonl(const DatasetManifest& manifest);
DatasetManifest from_jsonl(std::string_view text);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Directory names that map to each label at the top level of a dataset tree.
struct LabelingRule {
  std::vector<std::string> real_names{"real"};
  std::vector<std::string> gan_names{"gan", "fake"};
};

/// Walks <root>/<label>/<category>/*.{png,jpg,jpeg} and returns the records
/// sorted by path. Throws FileNotFound if root is missing, EmptyDirectory if no
/// image is found, AmbiguousLabel for a top-level directory that matches no
/// rule or both rules.
DatasetManifest build_manifest(const std::filesystem::path& root, const LabelingRule& rule = {});

std::vector<cooc::ImageRecord> image_records(const DatasetManifest& manifest, std::span<const std::size_t> indices);

}  // namespace coocnet::harness
