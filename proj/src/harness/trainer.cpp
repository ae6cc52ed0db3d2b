#include "coocnet/error.hpp"
#include "coocnet/rng.hpp"
#include "coocnet/trainer.hpp"

#include <algorithm>

namespace coocnet::harness {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be >= 1");
  if (cfg.batch_size < 1) throw Error(Errc::InvalidConfig, "batch size must be >= 1");
  if (cfg.adam.learning_rate <= 0) throw Error(Errc::InvalidConfig, "learning rate must be positive");
  cooc::validate(cfg.cooc);
}

TrainResult train(const FeatureSet& features, std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices, const net::NetworkSpec& spec, const TrainConfig& cfg) {
  validate(cfg);
  if (train_indices.empty()) throw Error(Errc::EmptySplit, "training split is empty");
  const net::Network<float> network(spec);
  if (features.feature_size() != network.input_size()) {
    throw Error(Errc::ShapeMismatch, "feature size does not match the network input");
  }

  net::ModelParams params = net::init_params(spec, derive_seed(cfg.seed, 0x1417));
  net::OptimizerState optimizer = net::make_optimizer_state(params, cfg.adam);
  net::BatchGradientEngine engine(network, cfg.workers);
  const net::ExampleReader reader = [&features](std::size_t index, std::span<float> out) {
    features.read(index, out);
    return target_of(features.info(index).label);
  };

  TrainResult result;
  std::vector<std::size_t> order(train_indices.begin(), train_indices.end());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::optional<double> best_val;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::copy(train_indices.begin(), train_indices.end(), order.begin());
    Rng rng(derive_seed(cfg.seed, 0xe90c0000ULL + static_cast<std::uint64_t>(epoch)));
    shuffle(std::span(order), rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto count = std::min(batch, order.size() - start);
      const auto gradient = engine.compute(params, std::span(order).subspan(start, count), reader);
      net::adam_step(params, gradient.mean_gradient, optimizer);
      loss_sum += gradient.loss_sum;
      correct += gradient.correct;
      ++result.steps;
      if (epoch == 0) result.batch_sizes.push_back(count);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    if (!val_indices.empty()) {
      const Metrics val = evaluate(network, params, features, val_indices, cfg.workers);
      record.val_loss = val.mean_loss;
      record.val_acc = val.accuracy;
      if (!best_val || val.accuracy > *best_val) {
        best_val = val.accuracy;
        result.best_params = params;
        result.best_epoch = epoch;
      }
    } else {
      result.best_params = params;
      result.best_epoch = epoch;
    }
    result.metrics.history.push_back(record);
    if (cfg.on_epoch) cfg.on_epoch(record);
  }

  auto history = std::move(result.metrics.history);
  result.metrics = evaluate(network, result.best_params, features,
                            val_indices.empty() ? train_indices : val_indices, cfg.workers);
  result.metrics.history = std::move(history);
  return result;
}

DatasetManifest ensure_split(const DatasetManifest& manifest, std::uint64_t seed) {
  if (manifest.empty()) throw Error(Errc::EmptyManifest, "manifest has no records");
  const auto unassigned = manifest.indices_of(Split::Unassigned).size();
  if (unassigned == 0) return manifest;
  if (unassigned == manifest.size()) return split_dataset(manifest, SplitRatios{}, seed);
  throw Error(Errc::InvalidManifest, "manifest mixes assigned and unassigned records");
}

TrainResult train(const DatasetManifest& manifest, const net::NetworkSpec& spec, const TrainConfig& cfg) {
  validate(cfg);
  if (cfg.cooc.bins != spec.bins) throw Error(Errc::ShapeMismatch, "co-occurrence bins differ from the network input");
  const DatasetManifest split = ensure_split(manifest, cfg.seed);
  auto wanted = split.indices_of(Split::Train);
  const auto val = split.indices_of(Split::Val);
  wanted.insert(wanted.end(), val.begin(), val.end());
  std::sort(wanted.begin(), wanted.end());

  auto extracted = extract_features(split, wanted, cfg.cooc, {cfg.workers, std::nullopt});
  auto result = train(extracted.features, extracted.positions_of(split, Split::Train),
                      extracted.positions_of(split, Split::Val), spec, cfg);
  result.extraction_failures = std::move(extracted.failures);
  return result;
}

}  // namespace coocnet::harness
