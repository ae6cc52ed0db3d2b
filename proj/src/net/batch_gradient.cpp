#include "coocnet/error.hpp"
#include "coocnet/network.hpp"
#include "coocnet/parallel.hpp"

#include <cmath>
#include <thread>

namespace coocnet::net {

struct BatchGradientEngine::Slot {
  std::unique_ptr<Workspace<float>> workspace;
  BasicParams<double> accumulator;
  std::vector<float> features;
  double loss_sum = 0.0;
  std::size_t correct = 0;
};

BatchGradientEngine::BatchGradientEngine(const Network<float>& network, int workers)
    : network_(network), workers_(std::max(workers, 1)) {
  for (int w = 0; w < workers_; ++w) {
    auto slot = std::make_unique<Slot>();
    slot->workspace = network_.make_workspace();
    slot->accumulator = zero_params<double>(network_.spec());
    slot->features.resize(network_.input_size());
    slots_.push_back(std::move(slot));
  }
}

BatchGradientEngine::~BatchGradientEngine() = default;

BatchGradient BatchGradientEngine::compute(const ModelParams& params, std::span<const std::size_t> indices,
                                           const ExampleReader& reader) {
  if (indices.empty()) throw Error(Errc::EmptySplit, "empty batch");
  const std::size_t parts = std::min<std::size_t>(static_cast<std::size_t>(workers_), indices.size());
  const auto bounds = contiguous_bounds(indices.size(), parts);

  auto run_part = [&](std::size_t part) {
    Slot& slot = *slots_[part];
    slot.accumulator.set_zero();
    slot.loss_sum = 0.0;
    slot.correct = 0;
    for (std::size_t i = bounds[part]; i < bounds[part + 1]; ++i) {
      const int target = reader(indices[i], slot.features);
      const auto out = network_.accumulate_gradient(params, std::span<const float>(slot.features), target,
                                                    slot.accumulator, *slot.workspace);
      slot.loss_sum += out.loss;
      const int predicted = out.probability >= 0.5f ? 1 : 0;
      if (predicted == target) ++slot.correct;
    }
  };
  parallel_for(parts, static_cast<int>(parts), [&](std::size_t part, int) { run_part(part); });

  BatchGradient result;
  result.count = indices.size();
  // Fixed reduction order: worker 0, 1, 2, ...
  BasicParams<double>& total = slots_[0]->accumulator;
  result.loss_sum = slots_[0]->loss_sum;
  result.correct = slots_[0]->correct;
  for (std::size_t part = 1; part < parts; ++part) {
    const auto& acc = slots_[part]->accumulator;
    for (std::size_t t = 0; t < total.tensors.size(); ++t) {
      auto& dst = total.tensors[t].data;
      const auto& src = acc.tensors[t].data;
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    result.loss_sum += slots_[part]->loss_sum;
    result.correct += slots_[part]->correct;
  }

  const double scale = 1.0 / static_cast<double>(indices.size());
  result.mean_gradient.tensors.reserve(total.tensors.size());
  for (const auto& t : total.tensors) {
    Tensor<float> g{t.shape, std::vector<float>(t.size())};
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double v = t.data[k] * scale;
      if (!std::isfinite(v)) throw Error(Errc::NonFiniteGradient, "batch gradient has NaN or Inf");
      g.data[k] = static_cast<float>(v);
    }
    result.mean_gradient.tensors.push_back(std::move(g));
  }
  return result;
}

}  // namespace coocnet::net
