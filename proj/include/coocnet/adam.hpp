#pragma once

#include "coocnet/network.hpp"

#include <cstdint>
#include <vector>

namespace coocnet::net {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct OptimizerState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<float>> first_moment;
  std::vector<std::vector<float>> second_moment;
};

/// Zero moments shaped like `params`.
OptimizerState make_optimizer_state(const ModelParams& params, const AdamConfig& config = {});

/// One bias-corrected Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Throws Error(ShapeMismatch) if params, grads and state disagree.
void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state);

}  // namespace coocnet::net
