#include "coocnet/adam.hpp"
#include "coocnet/error.hpp"

#include <cmath>

namespace coocnet::net {

OptimizerState make_optimizer_state(const ModelParams& params, const AdamConfig& config) {
  OptimizerState state;
  state.config = config;
  for (const auto& t : params.tensors) {
    state.first_moment.emplace_back(t.size(), 0.0f);
    state.second_moment.emplace_back(t.size(), 0.0f);
  }
  return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state) {
  const std::size_t n = params.tensors.size();
  if (grads.tensors.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw Error(Errc::ShapeMismatch, "optimizer: parameter, gradient and moment lists differ in length");
  }
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t len = params.tensors[t].size();
    if (grads.tensors[t].size() != len || state.first_moment[t].size() != len ||
        state.second_moment[t].size() != len) {
      throw Error(Errc::ShapeMismatch, "optimizer: tensor " + std::to_string(t) + " size mismatch");
    }
  }

  const auto& cfg = state.config;
  ++state.step;
  const double step = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, step);
  const double correction2 = 1.0 - std::pow(cfg.beta2, step);

  for (std::size_t t = 0; t < n; ++t) {
    auto& theta = params.tensors[t].data;
    const auto& g = grads.tensors[t].data;
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = g[k];
      const double mk = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk;
      const double vk = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      const double update = cfg.learning_rate * (mk / correction1) / (std::sqrt(vk / correction2) + cfg.epsilon);
      theta[k] = static_cast<float>(theta[k] - update);
    }
  }
}

}  // namespace coocnet::net
