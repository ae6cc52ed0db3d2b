#include "coocnet/error.hpp"
#include "coocnet/metrics.hpp"
#include "coocnet/parallel.hpp"

#include <cstdio>

namespace coocnet::harness {

nlohmann::ordered_json to_json(const Metrics& metrics) {
  nlohmann::ordered_json j;
  j["accuracy"] = metrics.accuracy;
  j["confusion"] = {{"tp", metrics.confusion.tp},
                    {"tn", metrics.confusion.tn},
                    {"fp", metrics.confusion.fp},
                    {"fn", metrics.confusion.fn}};
  j["mean_loss"] = metrics.mean_loss;
  auto& cats = j["per_category"] = nlohmann::ordered_json::object();
  for (const auto& [name, acc] : metrics.per_category) {
    cats[name] = {{"accuracy", acc.accuracy()}, {"correct", acc.correct}, {"total", acc.total}};
  }
  auto& hist = j["history"] = nlohmann::ordered_json::array();
  for (const auto& e : metrics.history) {
    nlohmann::ordered_json row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["train_acc"] = e.train_acc;
    row["val_loss"] = e.val_loss ? nlohmann::ordered_json(*e.val_loss) : nlohmann::ordered_json();
    row["val_acc"] = e.val_acc ? nlohmann::ordered_json(*e.val_acc) : nlohmann::ordered_json();
    hist.push_back(std::move(row));
  }
  return j;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const auto& e : history) {
    out += std::to_string(e.epoch) + ',' + num(e.train_loss) + ',' + num(e.train_acc) + ',' +
           (e.val_loss ? num(*e.val_loss) : "") + ',' + (e.val_acc ? num(*e.val_acc) : "") + '\n';
  }
  return out;
}

Metrics evaluate(const net::Network<float>& network, const net::ModelParams& params, const FeatureSet& features,
                 std::span<const std::size_t> indices, int workers) {
  if (indices.empty()) throw Error(Errc::EmptySplit, "nothing to evaluate");
  if (features.feature_size() != network.input_size()) {
    throw Error(Errc::ShapeMismatch, "feature size does not match the network input");
  }
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, indices.size());
  std::vector<std::unique_ptr<net::Workspace<float>>> spaces;
  std::vector<std::vector<float>> buffers;
  for (std::size_t w = 0; w < threads; ++w) {
    spaces.push_back(network.make_workspace());
    buffers.emplace_back(network.input_size());
  }

  std::vector<float> probabilities(indices.size());
  parallel_for(indices.size(), static_cast<int>(threads), [&](std::size_t k, int w) {
    features.read(indices[k], buffers[w]);
    probabilities[k] = network.forward(params, std::span<const float>(buffers[w]), *spaces[w]);
  });

  Metrics m;
  double loss_sum = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& info = features.info(indices[k]);
    const Label predicted = classify(probabilities[k]);
    const bool correct = predicted == info.label;
    if (info.label == Label::Gan) {
      (correct ? m.confusion.tp : m.confusion.fn)++;
    } else {
      (correct ? m.confusion.tn : m.confusion.fp)++;
    }
    auto& cat = m.per_category[info.category];
    ++cat.total;
    if (correct) ++cat.correct;
    loss_sum += net::bce_loss(probabilities[k], target_of(info.label));
  }
  const auto total = static_cast<double>(indices.size());
  m.accuracy = static_cast<double>(m.confusion.tp + m.confusion.tn) / total;
  m.mean_loss = loss_sum / total;
  return m;
}

Metrics evaluate(const net::ModelParams& params, const net::NetworkSpec& spec, const DatasetManifest& manifest,
                 Split split, const cooc::CoOccConfig& cfg, int workers) {
  const auto indices = manifest.indices_of(split);
  if (indices.empty()) throw Error(Errc::EmptySplit, "split '" + std::string(to_string(split)) + "' is empty");
  if (cfg.bins != spec.bins) throw Error(Errc::ShapeMismatch, "co-occurrence bins differ from the network input");
  const auto extracted = extract_features(manifest, indices, cfg, {workers, std::nullopt});
  if (extracted.features.size() == 0) throw Error(Errc::EmptySplit, "no image of the split could be decoded");
  const net::Network<float> network(spec);
  return evaluate(network, params, extracted.features, iota_indices(extracted.features.size()), workers);
}

}  // namespace coocnet::harness
