#include "coocnet/error.hpp"
#include "coocnet/features.hpp"

#include <algorithm>

namespace coocnet::harness {

void InMemoryFeatures::add(SampleInfo info, std::vector<float> features) {
  if (features.size() != feature_size_) {
    throw Error(Errc::ShapeMismatch, "feature vector has " + std::to_string(features.size()) + " values, expected " +
                                         std::to_string(feature_size_));
  }
  infos_.push_back(std::move(info));
  features_.push_back(std::move(features));
}

void InMemoryFeatures::read(std::size_t index, std::span<float> out) const {
  const auto& f = features_.at(index);
  if (out.size() != f.size()) throw Error(Errc::ShapeMismatch, "feature buffer size mismatch");
  std::copy(f.begin(), f.end(), out.begin());
}

void CachedFeatures::add(SampleInfo info, std::filesystem::path file) {
  infos_.push_back(std::move(info));
  files_.push_back(std::move(file));
}

void CachedFeatures::read(std::size_t index, std::span<float> out) const {
  const auto cached = cooc::read_tensor_cache(files_.at(index));
  if (cached.tensor.bins != cfg_.bins || cached.offset != cfg_.offset || cached.symmetric != cfg_.symmetric) {
    throw Error(Errc::ShapeMismatch, "cached tensor " + files_[index].string() + " was extracted with other settings");
  }
  if (out.size() != cached.tensor.size()) throw Error(Errc::ShapeMismatch, "feature buffer size mismatch");
  std::copy(cached.tensor.data.begin(), cached.tensor.data.end(), out.begin());
}

std::vector<std::size_t> ExtractedFeatures::positions_of(const DatasetManifest& manifest, Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < manifest_index.size(); ++k) {
    if (manifest.records.at(manifest_index[k]).split == split) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

ExtractedFeatures extract_features(const DatasetManifest& manifest, std::span<const std::size_t> indices,
                                   const cooc::CoOccConfig& cfg, const cooc::ExtractOptions& options) {
  const auto records = image_records(manifest, indices);
  auto batch = cooc::batch_extract(records, cfg, options);

  ExtractedFeatures out;
  out.features = InMemoryFeatures(3u * cfg.bins * cfg.bins);
  for (auto& sample : batch.samples) {
    const std::size_t m = indices[sample.record_index];
    const auto& r = manifest.records[m];
    out.features.add({r.path, r.label, r.category}, std::move(sample.tensor.data));
    out.manifest_index.push_back(m);
  }
  for (auto& failure : batch.failures) {
    failure.record_index = indices[failure.record_index];
    out.failures.push_back(std::move(failure));
  }
  return out;
}

}  // namespace coocnet::harness
