#pragma once

#include "coocnet/cooc.hpp"
#include "coocnet/manifest.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace coocnet::harness {

struct SampleInfo {
  std::string path;
  Label label = Label::Real;
  std::string category;
};

/// Indexed collection of network inputs. read() must be safe to call from
/// several threads at once.
class FeatureSet {
 public:
  virtual ~FeatureSet() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t feature_size() const = 0;
  virtual const SampleInfo& info(std::size_t index) const = 0;
  virtual void read(std::size_t index, std::span<float> out) const = 0;
};

class InMemoryFeatures final : public FeatureSet {
 public:
  explicit InMemoryFeatures(std::size_t feature_size) : feature_size_(feature_size) {}

  /// Throws Error(ShapeMismatch) if `features` has the wrong length.
  void add(SampleInfo info, std::vector<float> features);

  std::size_t size() const override { return infos_.size(); }
  std::size_t feature_size() const override { return feature_size_; }
  const SampleInfo& info(std::size_t index) const override { return infos_.at(index); }
  void read(std::size_t index, std::span<float> out) const override;
  std::span<const float> view(std::size_t index) const { return features_.at(index); }

 private:
  std::size_t feature_size_;
  std::vector<SampleInfo> infos_;
  std::vector<std::vector<float>> features_;
};

/// Reads tensors lazily from tensor-cache files, one per sample; keeps memory
/// flat at 256 bins.
class CachedFeatures final : public FeatureSet {
 public:
  explicit CachedFeatures(const cooc::CoOccConfig& cfg) : cfg_(cfg) {}

  void add(SampleInfo info, std::filesystem::path file);

  std::size_t size() const override { return infos_.size(); }
  std::size_t feature_size() const override { return 3u * cfg_.bins * cfg_.bins; }
  const SampleInfo& info(std::size_t index) const override { return infos_.at(index); }
  /// Throws Error(ShapeMismatch) if the file was written with another config.
  void read(std::size_t index, std::span<float> out) const override;

 private:
  cooc::CoOccConfig cfg_;
  std::vector<SampleInfo> infos_;
  std::vector<std::filesystem::path> files_;
};

/// Features of a subset of a manifest. Sample k of `features` corresponds to
/// manifest record `manifest_index[k]`; records that failed to decode are
/// listed in `failures` and left out.
struct ExtractedFeatures {
  InMemoryFeatures features{0};
  std::vector<std::size_t> manifest_index;
  std::vector<cooc::ExtractFailure> failures;

  /// Positions in `features` of the manifest records with the given split.
  std::vector<std::size_t> positions_of(const DatasetManifest& manifest, Split split) const;
};

/// 0, 1, ..., n-1.
std::vector<std::size_t> iota_indices(std::size_t n);

ExtractedFeatures extract_features(const DatasetManifest& manifest, std::span<const std::size_t> indices,
                                   const cooc::CoOccConfig& cfg, const cooc::ExtractOptions& options = {});

}  // namespace coocnet::harness
