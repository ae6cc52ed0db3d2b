#pragma once

#include "coocnet/features.hpp"
#include "coocnet/network.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coocnet::harness {

/// Decision rule: p >= 0.5 -> gan.
inline constexpr double kDecisionThreshold = 0.5;

constexpr Label classify(double probability) noexcept {
  return probability >= kDecisionThreshold ? Label::Gan : Label::Real;
}

/// Gan is the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct CategoryAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
  friend bool operator==(const CategoryAccuracy&, const CategoryAccuracy&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  std::optional<double> val_loss;  // empty when there is no validation split
  std::optional<double> val_acc;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct Metrics {
  double accuracy = 0.0;
  Confusion confusion;
  double mean_loss = 0.0;
  std::map<std::string, CategoryAccuracy> per_category;
  std::vector<EpochRecord> history;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

nlohmann::ordered_json to_json(const Metrics& metrics);

/// "epoch,train_loss,train_acc,val_loss,val_acc" with one row per epoch.
std::string history_csv(const std::vector<EpochRecord>& history);

/// Classifies the given samples at threshold 0.5. Parallel over samples,
/// reduced in index order. Throws Error(EmptySplit) if `indices` is empty.
Metrics evaluate(const net::Network<float>& network, const net::ModelParams& params, const FeatureSet& features,
                 std::span<const std::size_t> indices, int workers = 1);

/// Extracts the records of `split` from the manifest and evaluates them.
Metrics evaluate(const net::ModelParams& params, const net::NetworkSpec& spec, const DatasetManifest& manifest,
                 Split split, const cooc::CoOccConfig& cfg, int workers = 1);

}  // namespace coocnet::harness
