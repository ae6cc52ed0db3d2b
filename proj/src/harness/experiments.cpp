#include "coocnet/error.hpp"
#include "coocnet/experiments.hpp"
#include "coocnet/rng.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace coocnet::harness {

namespace {

void check_bins(const net::NetworkSpec& spec, const TrainConfig& cfg) {
  if (cfg.cooc.bins != spec.bins) throw Error(Errc::ShapeMismatch, "co-occurrence bins differ from the network input");
}

// Positions in `extracted` of the given manifest indices (those that decoded).
std::vector<std::size_t> positions_for(const ExtractedFeatures& extracted, std::span<const std::size_t> wanted) {
  const std::set<std::size_t> keep(wanted.begin(), wanted.end());
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < extracted.manifest_index.size(); ++k) {
    if (keep.contains(extracted.manifest_index[k])) out.push_back(k);
  }
  return out;
}

}  // namespace

CrossDatasetResult cross_dataset(const DatasetManifest& train_manifest, const DatasetManifest& test_manifest,
                                 const net::NetworkSpec& spec, const TrainConfig& cfg) {
  validate(cfg);
  check_bins(spec, cfg);
  if (train_manifest.empty() || test_manifest.empty()) {
    throw Error(Errc::EmptyManifest, "cross-dataset needs non-empty train and test manifests");
  }
  const cooc::ExtractOptions options{cfg.workers, std::nullopt};
  auto train_set = extract_features(train_manifest, train_manifest.all_indices(), cfg.cooc, options);
  const auto test_set = extract_features(test_manifest, test_manifest.all_indices(), cfg.cooc, options);

  CrossDatasetResult out;
  out.training = train(train_set.features, iota_indices(train_set.features.size()), {}, spec, cfg);
  out.training.extraction_failures = std::move(train_set.failures);
  const net::Network<float> network(spec);
  out.test = evaluate(network, out.training.best_params, test_set.features, iota_indices(test_set.features.size()),
                      cfg.workers);
  return out;
}

std::vector<std::string> gan_categories(const DatasetManifest& manifest) {
  std::set<std::string> cats;
  for (const auto& r : manifest.records) {
    if (r.label == Label::Gan) cats.insert(r.category);
  }
  return {cats.begin(), cats.end()};
}

LocoPartition loco_partition(const DatasetManifest& manifest, const std::string& category, std::uint64_t seed) {
  std::vector<std::size_t> held_gan, real;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest.records[i];
    if (r.label == Label::Gan && r.category == category) held_gan.push_back(i);
    if (r.label == Label::Real) real.push_back(i);
  }
  if (held_gan.empty()) throw Error(Errc::InvalidConfig, "no gan records in category '" + category + "'");

  // Seed depends on the category name so each fold draws its own real sample.
  std::uint64_t stream = 0xcbf29ce484222325ULL;
  for (const unsigned char c : category) stream = (stream ^ c) * 0x100000001b3ULL;
  Rng rng(derive_seed(seed, stream));
  shuffle(std::span(real), rng);
  real.resize(std::min(real.size(), held_gan.size()));
  std::sort(real.begin(), real.end());

  LocoPartition out;
  out.test = held_gan;
  out.test.insert(out.test.end(), real.begin(), real.end());
  const std::set<std::size_t> test_set(out.test.begin(), out.test.end());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!test_set.contains(i)) out.train.push_back(i);
  }
  return out;
}

LocoTable leave_one_category_out(const DatasetManifest& manifest, const net::NetworkSpec& spec,
                                 const TrainConfig& cfg) {
  validate(cfg);
  check_bins(spec, cfg);
  const auto categories = gan_categories(manifest);
  if (categories.size() < 2) {
    throw Error(Errc::SingleCategory, "leave-one-category-out needs at least two gan categories");
  }
  const auto extracted =
      extract_features(manifest, manifest.all_indices(), cfg.cooc, {cfg.workers, std::nullopt});
  const net::Network<float> network(spec);

  LocoTable table;
  for (const auto& category : categories) {
    const auto part = loco_partition(manifest, category, cfg.seed);
    const auto train_pos = positions_for(extracted, part.train);
    const auto test_pos = positions_for(extracted, part.test);
    const auto trained = train(extracted.features, train_pos, {}, spec, cfg);

    LocoRow row;
    row.category = category;
    row.metrics = evaluate(network, trained.best_params, extracted.features, test_pos, cfg.workers);
    row.metrics.history = trained.metrics.history;
    row.train_count = train_pos.size();
    for (const auto k : test_pos) {
      (extracted.features.info(k).label == Label::Gan ? row.test_gan : row.test_real)++;
    }
    table.rows.push_back(std::move(row));
  }
  double sum = 0.0;
  for (const auto& row : table.rows) sum += row.metrics.accuracy;
  table.average = sum / static_cast<double>(table.rows.size());
  return table;
}

JpegRobustness jpeg_robustness(const DatasetManifest& manifest, const net::NetworkSpec& spec, const TrainConfig& cfg,
                               const std::vector<int>& qualities) {
  validate(cfg);
  check_bins(spec, cfg);
  if (qualities.empty()) throw Error(Errc::InvalidConfig, "no JPEG qualities given");
  for (const int q : qualities) {
    if (q < 1 || q > 100) throw Error(Errc::InvalidConfig, "JPEG quality out of range: " + std::to_string(q));
  }
  const DatasetManifest split = ensure_split(manifest, cfg.seed);
  const auto all = split.all_indices();
  const net::Network<float> network(spec);

  JpegRobustness out;
  const auto original = extract_features(split, all, cfg.cooc, {cfg.workers, std::nullopt});
  const auto baseline = train(original.features, original.positions_of(split, Split::Train),
                              original.positions_of(split, Split::Val), spec, cfg);
  out.original_accuracy = evaluate(network, baseline.best_params, original.features,
                                   original.positions_of(split, Split::Test), cfg.workers)
                              .accuracy;

  for (const int q : qualities) {
    const auto compressed = extract_features(split, all, cfg.cooc, {cfg.workers, q});
    const auto test_pos = compressed.positions_of(split, Split::Test);
    out.trained_on_original[q] = evaluate(network, baseline.best_params, compressed.features, test_pos, cfg.workers);

    const auto retrained = train(compressed.features, compressed.positions_of(split, Split::Train),
                                 compressed.positions_of(split, Split::Val), spec, cfg);
    out.trained_on_compressed[q] =
        evaluate(network, retrained.best_params, compressed.features, test_pos, cfg.workers);
    out.trained_on_compressed[q].history = retrained.metrics.history;
  }
  return out;
}

}  // namespace coocnet::harness
