#include "test_util.hpp"

#include "coocnet/network.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace coocnet;
using namespace coocnet::net;

namespace {

std::vector<float> random_input(std::size_t n, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

// conv(units, k) -> flatten -> dense(1) -> sigmoid on a 3 x bins x bins input.
NetworkSpec single_conv(int bins, int units, int kernel) {
  return {bins, {LayerSpec::conv(units, kernel), LayerSpec::flatten(), LayerSpec::dense(1), LayerSpec::sigmoid()}};
}

// Zero-padded cross-correlation, written directly from the definition.
std::vector<double> brute_force_conv(const std::vector<float>& input, int channels, int size,
                                     const std::vector<float>& weight, const std::vector<float>& bias, int units,
                                     int k) {
  std::vector<double> out(static_cast<std::size_t>(units) * size * size);
  const int pad = k / 2;
  for (int o = 0; o < units; ++o) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double sum = bias[o];
        for (int c = 0; c < channels; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int sy = y + ky - pad;
              const int sx = x + kx - pad;
              if (sy < 0 || sy >= size || sx < 0 || sx >= size) continue;
              sum += double(weight[((o * channels + c) * k + ky) * k + kx]) * input[(c * size + sy) * size + sx];
            }
          }
        }
        out[(o * size + y) * size + x] = sum;
      }
    }
  }
  return out;
}

}  // namespace

TEST(Plan, StandardShapesAtBins32) {
  const auto layers = plan(NetworkSpec::standard(32));
  std::vector<int> pooled;
  for (const auto& p : layers) {
    if (p.spec.kind == LayerKind::MaxPool) pooled.push_back(p.out.height);
    if (p.spec.kind == LayerKind::Flatten) {
      EXPECT_EQ(p.out.size(), 2048u);
    }
  }
  EXPECT_EQ(pooled, (std::vector<int>{16, 8, 4}));
  EXPECT_EQ(layers.back().out.size(), 1u);
  EXPECT_EQ(describe(NetworkSpec::standard(32)),
            "3x32x32|conv32k3|relu|conv32k5|maxpool|conv64k3|relu|conv64k5|maxpool|conv128k3|relu|conv128k5|"
            "maxpool|flatten|dense256|relu|dense256|relu|dense1|sigmoid");
}

TEST(Plan, ParameterShapes) {
  const auto shapes = parameter_shapes(NetworkSpec::standard(64));
  ASSERT_EQ(shapes.size(), 18u);
  EXPECT_EQ(shapes[0], (std::vector<std::size_t>{32, 3, 3, 3}));
  EXPECT_EQ(shapes[1], (std::vector<std::size_t>{32}));
  EXPECT_EQ(shapes[2], (std::vector<std::size_t>{32, 32, 5, 5}));
  EXPECT_EQ(shapes[10], (std::vector<std::size_t>{128, 128, 5, 5}));
  EXPECT_EQ(shapes[12], (std::vector<std::size_t>{256, 128 * 8 * 8}));
  EXPECT_EQ(shapes[16], (std::vector<std::size_t>{1, 256}));
}

TEST(Plan, RejectsInconsistentStacks) {
  EXPECT_ERRC(plan(NetworkSpec::standard(12)), ShapeMismatch);  // 12 -> 6 -> 3 -> odd pool
  EXPECT_ERRC(plan(NetworkSpec{8, {LayerSpec::dense(1), LayerSpec::sigmoid()}}), ShapeMismatch);
  EXPECT_ERRC(plan(NetworkSpec{8, {LayerSpec::flatten(), LayerSpec::dense(2), LayerSpec::sigmoid()}}),
              ShapeMismatch);
  EXPECT_ERRC(plan(NetworkSpec{8, {LayerSpec::flatten(), LayerSpec::dense(1)}}), ShapeMismatch);
  EXPECT_ERRC(plan(NetworkSpec{8, {LayerSpec::conv(2, 2), LayerSpec::flatten(), LayerSpec::dense(1),
                                   LayerSpec::sigmoid()}}),
              ShapeMismatch);
}

TEST(Forward, ZeroModelGivesExactlyHalf) {
  const auto spec = NetworkSpec::standard(32);
  const auto params = zero_params<float>(spec);
  const Network<float> network(spec);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = random_input(network.input_size(), seed, -10.0f, 10.0f);
    EXPECT_EQ(network.forward(params, x), 0.5f);
  }
  EXPECT_EQ(bce_loss(0.5, 1), std::log(2.0));
  EXPECT_EQ(bce_loss(0.5, 0), std::log(2.0));
}

TEST(Forward, InputChecks) {
  const auto spec = NetworkSpec::standard(16);
  const Network<float> network(spec);
  const auto params = init_params(spec, 1);
  EXPECT_ERRC(network.forward(params, std::vector<float>(10)), ShapeMismatch);
  auto x = random_input(network.input_size(), 2);
  x[5] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_ERRC(network.forward(params, x), NonFiniteActivation);
  EXPECT_ERRC(network.forward(init_params(NetworkSpec::standard(32), 1), random_input(network.input_size(), 2)),
              ShapeMismatch);
}

TEST(Forward, OverflowIsReportedAsNonFinite) {
  const auto spec = NetworkSpec::standard(16);
  auto params = init_params(spec, 3);
  for (auto& v : params.tensors[0].data) v = 3e38f;
  const Network<float> network(spec);
  EXPECT_ERRC(network.forward(params, random_input(network.input_size(), 4, 0.5f, 1.0f)), NonFiniteActivation);
}

TEST(Forward, ConvMatchesBruteForce) {
  const int bins = 4;
  for (const int k : {1, 3, 5}) {
    const auto spec = single_conv(bins, 2, k);
    auto params = zero_params<float>(spec);
    params.tensors[0].data = random_input(params.tensors[0].size(), 10 + k, -1.0f, 1.0f);
    params.tensors[1].data = {0.25f, -0.5f};
    const Network<float> network(spec);
    auto ws = network.make_workspace();
    const auto x = random_input(network.input_size(), 20 + k);
    network.forward(params, x, *ws);
    const auto got = network.activation(*ws, 0);
    const auto want = brute_force_conv(x, 3, bins, params.tensors[0].data, params.tensors[1].data, 2, k);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-5) << "k " << k << " i " << i;
  }
}

TEST(Forward, ConvHandExample) {
  // 3x3 kernel that picks the right-hand neighbour in channel 1 and adds the
  // centre of channel 0.
  const auto spec = single_conv(4, 1, 3);
  auto params = zero_params<float>(spec);
  params.tensors[0].data[(0 * 3 + 1) * 3 + 1] = 1.0f;
  params.tensors[0].data[(1 * 3 + 1) * 3 + 2] = 1.0f;
  std::vector<float> x(48, 0.0f);
  std::iota(x.begin(), x.end(), 0.0f);  // channel c, pixel (y, x) = 16c + 4y + x
  const Network<float> network(spec);
  auto ws = network.make_workspace();
  network.forward(params, x, *ws);
  const auto out = network.activation(*ws, 0);
  for (int y = 0; y < 4; ++y) {
    for (int xx = 0; xx < 4; ++xx) {
      const float right = xx + 1 < 4 ? 16.0f + 4 * y + xx + 1 : 0.0f;
      EXPECT_EQ(out[4 * y + xx], 4.0f * y + xx + right);
    }
  }
}

TEST(Forward, BiasFreeConvIsLinear) {
  const auto spec = single_conv(8, 4, 3);
  auto params = zero_params<float>(spec);
  params.tensors[0].data = random_input(params.tensors[0].size(), 5, -1.0f, 1.0f);
  const Network<float> network(spec);
  auto ws = network.make_workspace();
  const auto x = random_input(network.input_size(), 6);
  auto x2 = x;
  for (auto& v : x2) v *= 2.0f;
  network.forward(params, x, *ws);
  const std::vector<float> once(network.activation(*ws, 0).begin(), network.activation(*ws, 0).end());
  network.forward(params, x2, *ws);
  const auto twice = network.activation(*ws, 0);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice[i], 2.0f * once[i]);
}

TEST(Forward, DeterministicAndWorkspaceIndependent) {
  const auto spec = NetworkSpec::standard(32);
  const auto params = init_params(spec, 9);
  const Network<float> network(spec);
  const auto x = random_input(network.input_size(), 7);
  auto ws1 = network.make_workspace();
  auto ws2 = network.make_workspace();
  const float a = network.forward(params, x, *ws1);
  network.forward(params, random_input(network.input_size(), 8), *ws2);
  const float b = network.forward(params, x, *ws2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, forward(params, spec, x));
}

TEST(Bce, Values) {
  EXPECT_NEAR(bce_loss(0.5, 1), 0.6931471805599453, 1e-12);
  EXPECT_NEAR(bce_loss(0.9, 1), 0.10536051565782628, 1e-12);
  EXPECT_NEAR(bce_loss(0.9, 0), 2.302585092994046, 1e-9);
  EXPECT_NEAR(bce_loss(0.0, 1), -std::log(kBceEpsilon), 1e-9);
  EXPECT_NEAR(bce_loss(1.0, 0), -std::log(kBceEpsilon), 1e-6);
  EXPECT_TRUE(std::isfinite(bce_loss(1.0, 0)));
}

TEST(Backward, ZeroModelOutputGradient) {
  const auto spec = NetworkSpec::standard(16);
  const auto params = zero_params<float>(spec);
  const auto x = random_input(3 * 16 * 16, 1);
  const auto g1 = backward(params, spec, x, 1);
  const auto g0 = backward(params, spec, x, 0);
  EXPECT_EQ(g1.tensors.back().data, std::vector<float>{-0.5f});
  EXPECT_EQ(g0.tensors.back().data, std::vector<float>{0.5f});
  ASSERT_EQ(g1.tensors.size(), params.tensors.size());
  for (std::size_t i = 0; i < params.tensors.size(); ++i) EXPECT_EQ(g1.tensors[i].shape, params.tensors[i].shape);
}

TEST(Backward, FinalBiasGradientIsPMinusY) {
  const auto spec = NetworkSpec::standard(16);
  const auto params = init_params(spec, 4);
  const Network<float> network(spec);
  const auto x = random_input(network.input_size(), 2);
  const float p = network.forward(params, x);
  for (const int y : {0, 1}) {
    const auto g = backward(params, spec, x, y);
    EXPECT_FLOAT_EQ(g.tensors.back().data[0], p - static_cast<float>(y));
  }
}

TEST(Backward, ReluBlocksGradientWhereInputNegative) {
  // conv -> relu -> flatten -> dense(1) -> sigmoid; the gradient wrt the conv
  // bias of unit o is the sum over positions where the pre-activation is > 0.
  const NetworkSpec spec{4, {LayerSpec::conv(2, 1), LayerSpec::relu(), LayerSpec::flatten(), LayerSpec::dense(1),
                             LayerSpec::sigmoid()}};
  auto params = zero_params<double>(spec);
  params.tensors[0].data = {1.0, -1.0, 0.5, -2.0, 1.0, 0.0};
  params.tensors[1].data = {-0.3, 0.2};
  for (auto& v : params.tensors[2].data) v = 0.1;
  const Network<double> network(spec);
  auto ws = network.make_workspace();
  std::vector<double> x(48);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : x) v = dist(rng);

  auto grad = zero_params<double>(spec);
  const auto out = network.accumulate_gradient(params, x, 1, grad, ws.operator*());
  const double dlogit = out.probability - 1.0;
  const auto pre = network.activation(*ws, 0);
  for (int o = 0; o < 2; ++o) {
    double expected = 0.0;
    for (int i = 0; i < 16; ++i) {
      if (pre[o * 16 + i] > 0.0) expected += dlogit * 0.1;
    }
    EXPECT_NEAR(grad.tensors[1].data[o], expected, 1e-12);
  }
}

TEST(Backward, MaxPoolRoutesGradientToArgmaxOnly) {
  // A 1x1 conv with weight 1 on channel 0 makes the pool input equal to the
  // input image, so the input-side gradient pattern is visible through the
  // conv weight gradient of a second, position-sensitive copy.
  const NetworkSpec spec{4, {LayerSpec::conv(1, 1), LayerSpec::max_pool(), LayerSpec::flatten(), LayerSpec::dense(1),
                             LayerSpec::sigmoid()}};
  auto params = zero_params<double>(spec);
  params.tensors[0].data = {1.0, 0.0, 0.0};
  params.tensors[2].data = {1.0, 2.0, 3.0, 4.0};
  const Network<double> network(spec);
  auto ws = network.make_workspace();
  std::vector<double> x(48, 0.0);
  // Channel 0 with a unique maximum in each 2x2 window; channel 1 is one-hot
  // at the positions whose gradient we probe.
  const double ch0[16] = {1, 5, 0, 2, 3, 4, 9, 1, 0, 0, 1, 1, 8, 0, 1, 7};
  for (int i = 0; i < 16; ++i) x[i] = ch0[i];
  auto grad = zero_params<double>(spec);
  const auto out = network.accumulate_gradient(params, x, 0, grad, *ws);
  const double d = out.probability;  // p - y with y = 0
  // dL/dw[c] = sum_i x_c[i] * dL/dconv_out[i]; with channel 0 the gradient
  // lands only on the window maxima 5, 9, 8, 7 with dense weights 1..4.
  EXPECT_NEAR(grad.tensors[0].data[0], d * (5 * 1 + 9 * 2 + 8 * 3 + 7 * 4), 1e-9);
  EXPECT_NEAR(grad.tensors[1].data[0], d * (1 + 2 + 3 + 4), 1e-12);
  // Probe which positions get gradient by putting a one-hot in channel 1.
  for (int pos = 0; pos < 16; ++pos) {
    std::fill(x.begin() + 16, x.begin() + 32, 0.0);
    x[16 + pos] = 1.0;
    grad.set_zero();
    const auto o = network.accumulate_gradient(params, x, 0, grad, *ws);
    const bool is_max = ch0[pos] == 5 || ch0[pos] == 9 || ch0[pos] == 8 || ch0[pos] == 7;
    if (is_max) {
      EXPECT_NE(grad.tensors[0].data[1], 0.0) << pos;
    } else {
      EXPECT_EQ(grad.tensors[0].data[1], 0.0) << pos;
    }
    (void)o;
  }
}

TEST(Init, DeterministicZeroBiasHeScale) {
  const auto spec = NetworkSpec::standard(32);
  const auto a = init_params(spec, 123);
  EXPECT_EQ(a, init_params(spec, 123));
  EXPECT_NE(a, init_params(spec, 124));
  for (std::size_t i = 1; i < a.tensors.size(); i += 2) {
    for (const float v : a.tensors[i].data) ASSERT_EQ(v, 0.0f);
  }
  // conv128k5: fan_in = 128 * 5 * 5.
  const auto& w = a.tensors[10];
  ASSERT_EQ(w.shape, (std::vector<std::size_t>{128, 128, 5, 5}));
  double sum = 0.0;
  double sq = 0.0;
  for (const float v : w.data) {
    sum += v;
    sq += double(v) * v;
  }
  const double n = static_cast<double>(w.size());
  const double mean = sum / n;
  const double stddev = std::sqrt(sq / n - mean * mean);
  const double target = std::sqrt(2.0 / (128 * 25));
  EXPECT_NEAR(stddev, target, 0.1 * target);
}

TEST(BatchGradient, WorkerCountIndependent) {
  const auto spec = NetworkSpec::standard(16);
  const auto params = init_params(spec, 21);
  const Network<float> network(spec);
  std::vector<std::vector<float>> inputs;
  for (std::uint64_t i = 0; i < 24; ++i) inputs.push_back(random_input(network.input_size(), 100 + i));
  const ExampleReader reader = [&](std::size_t i, std::span<float> out) {
    std::copy(inputs[i].begin(), inputs[i].end(), out.begin());
    return static_cast<int>(i % 2);
  };
  std::vector<std::size_t> batch(24);
  std::iota(batch.begin(), batch.end(), 0);

  BatchGradientEngine one(network, 1);
  BatchGradientEngine eight(network, 8);
  const auto a = one.compute(params, batch, reader);
  const auto b = eight.compute(params, batch, reader);
  EXPECT_EQ(a.count, 24u);
  EXPECT_EQ(a.correct, b.correct);
  EXPECT_NEAR(a.loss_sum, b.loss_sum, 1e-9 * std::abs(a.loss_sum));
  for (std::size_t t = 0; t < a.mean_gradient.tensors.size(); ++t) {
    const auto& ga = a.mean_gradient.tensors[t].data;
    const auto& gb = b.mean_gradient.tensors[t].data;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ASSERT_LE(std::abs(ga[i] - gb[i]), 1e-5 * std::abs(ga[i]) + 1e-30f) << "tensor " << t << " index " << i;
    }
  }
  EXPECT_EQ(one.compute(params, batch, reader).mean_gradient, a.mean_gradient);

  // Mean of per-example gradients.
  auto sum = zero_params<double>(spec);
  auto ws = network.make_workspace();
  for (const auto i : batch) network.accumulate_gradient(params, std::span<const float>(inputs[i]), int(i % 2), sum, *ws);
  for (std::size_t t = 0; t < sum.tensors.size(); ++t) {
    for (std::size_t i = 0; i < sum.tensors[t].size(); i += 97) {
      EXPECT_FLOAT_EQ(a.mean_gradient.tensors[t].data[i], static_cast<float>(sum.tensors[t].data[i] / 24.0));
    }
  }
}

TEST(BatchGradient, NonFiniteGradientDetected) {
  const auto spec = NetworkSpec::standard(8);
  auto params = init_params(spec, 2);
  for (auto& v : params.tensors[16].data) v = 1e30f;
  for (auto& v : params.tensors[14].data) v = 1e30f;
  const Network<float> network(spec);
  const ExampleReader reader = [&](std::size_t, std::span<float> out) {
    std::fill(out.begin(), out.end(), 1.0f);
    return 1;
  };
  BatchGradientEngine engine(network, 1);
  const std::vector<std::size_t> batch{0};
  try {
    engine.compute(params, batch, reader);
    ADD_FAILURE() << "expected a numerical error";
  } catch (const Error& e) {
    EXPECT_TRUE(is_numerical(e.code())) << e.what();
  }
}
