#include "oracles/finite_difference.hpp"
#include "test_util.hpp"

using namespace coocnet;
using namespace coocnet::net;

namespace {

constexpr double kTolerance = 1e-4;
constexpr double kMaxKinkFraction = 0.05;

}  // namespace

TEST(GradientCheck, StandardNetworkBins32) {
  const auto spec = NetworkSpec::standard(32);
  for (const int label : {1, 0}) {
    const auto report = oracle::gradient_check(spec, 31, label);
    EXPECT_GE(report.samples.size(), 200u);
    EXPECT_LE(report.kinks, kMaxKinkFraction * static_cast<double>(report.samples.size()));
    for (const auto& s : report.samples) {
      EXPECT_LT(s.relative_error, kTolerance)
          << "tensor " << s.tensor << " index " << s.index << " analytic " << s.analytic << " numeric " << s.numeric;
    }
    std::printf("label %d: %zu parameters checked, %d redrawn at kinks, worst relative error %.3g\n", label,
                report.samples.size(), report.kinks, report.worst);
  }
}

TEST(GradientCheck, SmallStackWithDenseRelu) {
  const NetworkSpec spec{8, {LayerSpec::conv(4, 3), LayerSpec::relu(), LayerSpec::max_pool(), LayerSpec::flatten(),
                             LayerSpec::dense(6), LayerSpec::relu(), LayerSpec::dense(1), LayerSpec::sigmoid()}};
  for (const std::uint64_t seed : {1, 2, 3}) {
    const auto report = oracle::gradient_check(spec, seed, static_cast<int>(seed % 2));
    for (const auto& s : report.samples) EXPECT_LT(s.relative_error, kTolerance) << "tensor " << s.tensor;
  }
}

TEST(GradientCheck, EveryLayerKindInPath) {
  // Every conv and dense tensor is sampled, and the standard stack routes those
  // gradients through relu, max-pool, flatten and sigmoid.
  std::vector<LayerKind> kinds;
  for (const auto& p : plan(NetworkSpec::standard(32))) kinds.push_back(p.spec.kind);
  for (const auto kind : {LayerKind::Conv, LayerKind::Relu, LayerKind::MaxPool, LayerKind::Flatten, LayerKind::Dense,
                          LayerKind::Sigmoid}) {
    EXPECT_NE(std::find(kinds.begin(), kinds.end(), kind), kinds.end());
  }
}
