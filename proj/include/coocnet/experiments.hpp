#pragma once

#include "coocnet/trainer.hpp"

#include <map>
#include <string>
#include <vector>

namespace coocnet::harness {

struct CrossDatasetResult {
  Metrics test;          // on every record of the test manifest
  TrainResult training;  // trained on every record of the train manifest
};

/// Trains on all records of `train_manifest` (no validation split; the last
/// epoch is kept) and evaluates on all records of `test_manifest`.
CrossDatasetResult cross_dataset(const DatasetManifest& train_manifest, const DatasetManifest& test_manifest,
                                 const net::NetworkSpec& spec, const TrainConfig& cfg);

/// Sorted distinct categories among gan-labelled records.
std::vector<std::string> gan_categories(const DatasetManifest& manifest);

struct LocoPartition {
  std::vector<std::size_t> train;  // manifest indices, ascending
  std::vector<std::size_t> test;   // held-out gan records, then the sampled real records
  friend bool operator==(const LocoPartition&, const LocoPartition&) = default;
};

/// Holds out every gan record of `category` plus a seeded sample of the same
/// number of real records (all of them if there are fewer); everything else
/// trains.
LocoPartition loco_partition(const DatasetManifest& manifest, const std::string& category, std::uint64_t seed);

struct LocoRow {
  std::string category;
  Metrics metrics;
  std::size_t train_count = 0;
  std::size_t test_gan = 0;
  std::size_t test_real = 0;
};

struct LocoTable {
  std::vector<LocoRow> rows;  // one per gan category, sorted by name
  double average = 0.0;       // arithmetic mean of the row accuracies
};

/// Leave-one-category-out over the gan categories. Throws
/// Error(SingleCategory) if there are fewer than two.
LocoTable leave_one_category_out(const DatasetManifest& manifest, const net::NetworkSpec& spec, const TrainConfig& cfg);

struct JpegRobustness {
  double original_accuracy = 0.0;                  // original model on the original test split
  std::map<int, Metrics> trained_on_original;      // tested on the recompressed test split
  std::map<int, Metrics> trained_on_compressed;    // trained, validated and tested at that quality
};

/// Both recompression scenarios over the manifest's train/val/test splits
/// (split 50/25/25 with cfg.seed first if unassigned).
JpegRobustness jpeg_robustness(const DatasetManifest& manifest, const net::NetworkSpec& spec, const TrainConfig& cfg,
                               const std::vector<int>& qualities = {95, 85, 75});

}  // namespace coocnet::harness
