#pragma once

#include "coocnet/adam.hpp"
#include "coocnet/metrics.hpp"
#include "coocnet/split.hpp"

#include <functional>

namespace coocnet::harness {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 40;
  std::uint64_t seed = 0;
  net::AdamConfig adam;
  cooc::CoOccConfig cooc;
  int workers = 1;
  /// Called after every epoch, e.g. for progress logging.
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Throws Error(InvalidConfig) for epochs < 1, batch_size < 1 or a bad
/// co-occurrence config.
void validate(const TrainConfig& cfg);

struct TrainResult {
  net::ModelParams best_params;
  int best_epoch = -1;
  /// Metrics of `best_params` on the validation samples (on the training
  /// samples when there is no validation split), plus the full history.
  Metrics metrics;
  std::size_t steps = 0;
  std::vector<std::size_t> batch_sizes;  // of the first epoch
  std::vector<cooc::ExtractFailure> extraction_failures;
};

/// Mini-batch Adam on the training samples, reshuffled every epoch with a seed
/// derived from (seed, epoch). With validation samples the epoch with the
/// highest validation accuracy wins (earliest on ties); without, the last
/// epoch is returned.
TrainResult train(const FeatureSet& features, std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices, const net::NetworkSpec& spec, const TrainConfig& cfg);

/// Extracts features for the manifest's train and val splits and trains.
/// A manifest with no split assignments is split 50/25/25 with cfg.seed first.
/// Decode failures are reported in the result and skipped.
TrainResult train(const DatasetManifest& manifest, const net::NetworkSpec& spec, const TrainConfig& cfg);

/// Returns the manifest unchanged if every record has a split, splits it with
/// the default ratios if none has, and throws InvalidManifest otherwise.
DatasetManifest ensure_split(const DatasetManifest& manifest, std::uint64_t seed);

}  // namespace coocnet::harness
