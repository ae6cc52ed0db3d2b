#pragma once

// Central finite-difference gradient check of the double-precision network.

#include "coocnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace coocnet::oracle {

struct GradCheckOptions {
  double step = 1e-5;
  int samples_per_tensor = 12;
  // Where the loss is smooth over [theta - h, theta + h] the one-sided
  // differences agree to O(h); a ReLU or max-pool switch inside the interval
  // makes them disagree by O(1). Such samples are redrawn, not compared.
  double kink_threshold = 1e-3;
};

struct GradCheckSample {
  std::size_t tensor = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckSample> samples;
  int kinks = 0;
  double worst = 0.0;
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// He-initialized parameters (seed) and a uniform [0, 1) input; samples
/// `samples_per_tensor` entries of every parameter tensor.
inline GradCheckReport gradient_check(const net::NetworkSpec& spec, std::uint64_t seed, int label,
                                      const GradCheckOptions& opt = {}) {
  auto params = net::cast_params<double>(net::init_params(spec, seed));
  const net::Network<double> network(spec);
  auto ws = network.make_workspace();

  std::mt19937_64 rng(seed * 7 + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(network.input_size());
  for (auto& v : x) v = unit(rng);

  auto grad = net::zero_params<double>(spec);
  network.accumulate_gradient(params, x, label, grad, *ws);
  auto loss = [&] { return net::bce_loss(network.forward(params, x, *ws), label); };
  const double base = loss();

  GradCheckReport report;
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    auto& data = params.tensors[t].data;
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (int s = 0; s < opt.samples_per_tensor;) {
      const std::size_t i = pick(rng);
      const double saved = data[i];
      data[i] = saved + opt.step;
      const double up = loss();
      data[i] = saved - opt.step;
      const double down = loss();
      data[i] = saved;
      if (relative_error((up - base) / opt.step, (base - down) / opt.step) > opt.kink_threshold) {
        ++report.kinks;
        continue;
      }
      GradCheckSample sample{t, i, grad.tensors[t].data[i], (up - down) / (2.0 * opt.step), 0.0};
      sample.relative_error = relative_error(sample.numeric, sample.analytic);
      report.worst = std::max(report.worst, sample.relative_error);
      report.samples.push_back(sample);
      ++s;
    }
  }
  return report;
}

}  // namespace coocnet::oracle
