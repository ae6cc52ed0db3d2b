#include "coocnet/error.hpp"
#include "coocnet/network.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace coocnet::net {

namespace {

// Convolutions are lowered to GEMM one band of output rows at a time, so the
// im2col buffer stays bounded (about kBandColumns columns) even at 256 bins.
constexpr int kBandColumns = 4096;

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using VectorMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

int band_rows(const Shape& s) { return std::clamp(kBandColumns / s.width, 1, s.height); }

template <typename T>
bool all_finite(std::span<const T> v) {
  for (const T x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

template <typename T>
T stable_sigmoid(T z) {
  if (z >= T{0}) return T{1} / (T{1} + std::exp(-z));
  const T e = std::exp(z);
  return e / (T{1} + e);
}

// Column j of the band is output pixel (y0 + j / W, j % W); row r is input
// tap (c, ky, kx) with r = (c * k + ky) * k + kx.
template <typename T>
void im2col_band(const T* in, const Shape& s, int k, int y0, int y1, T* col) {
  const int pad = k / 2;
  const int W = s.width;
  const std::size_t ncols = static_cast<std::size_t>(y1 - y0) * W;
  for (int c = 0; c < s.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col + static_cast<std::size_t>((c * k + ky) * k + kx) * ncols;
        const int x_lo = std::max(0, pad - kx);
        const int x_hi = std::min(W, W + pad - kx);
        for (int y = y0; y < y1; ++y, dst += W) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= s.height || x_lo >= x_hi) {
            std::fill(dst, dst + W, T{0});
            continue;
          }
          const T* src = in + (static_cast<std::size_t>(c) * s.height + sy) * W + (kx - pad);
          std::fill(dst, dst + x_lo, T{0});
          std::copy(src + x_lo, src + x_hi, dst + x_lo);
          std::fill(dst + x_hi, dst + W, T{0});
        }
      }
    }
  }
}

template <typename T>
void col2im_band_add(const T* col, const Shape& s, int k, int y0, int y1, T* grad_in) {
  const int pad = k / 2;
  const int W = s.width;
  const std::size_t ncols = static_cast<std::size_t>(y1 - y0) * W;
  for (int c = 0; c < s.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + static_cast<std::size_t>((c * k + ky) * k + kx) * ncols;
        const int x_lo = std::max(0, pad - kx);
        const int x_hi = std::min(W, W + pad - kx);
        for (int y = y0; y < y1; ++y, src += W) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= s.height) continue;
          T* dst = grad_in + (static_cast<std::size_t>(c) * s.height + sy) * W + (kx - pad);
          for (int x = x_lo; x < x_hi; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)), plan_(plan(spec_)) {}

template <typename T>
Network<T>::~Network() = default;
template <typename T>
Network<T>::Network(Network&&) noexcept = default;
template <typename T>
Network<T>& Network<T>::operator=(Network&&) noexcept = default;

template <typename T>
std::unique_ptr<Workspace<T>> Network<T>::make_workspace() const {
  auto ws = std::make_unique<Workspace<T>>();
  ws->input.resize(input_size());
  ws->acts.resize(plan_.size());
  ws->argmax.resize(plan_.size());
  std::size_t max_act = input_size();
  std::size_t max_col = 0;
  std::size_t max_dweight = 0;
  for (std::size_t l = 0; l < plan_.size(); ++l) {
    const auto& p = plan_[l];
    ws->acts[l].resize(p.out.size());
    max_act = std::max(max_act, p.out.size());
    if (p.spec.kind == LayerKind::MaxPool) ws->argmax[l].resize(p.out.size());
    if (p.spec.kind == LayerKind::Conv) {
      const std::size_t taps = static_cast<std::size_t>(p.in.channels) * p.spec.kernel * p.spec.kernel;
      max_col = std::max(max_col, taps * band_rows(p.in) * p.in.width);
      max_dweight = std::max(max_dweight, taps * p.out.channels);
    }
  }
  ws->col.resize(max_col);
  ws->dcol.resize(max_col);
  ws->dweight.resize(max_dweight);
  ws->grad_a.resize(max_act);
  ws->grad_b.resize(max_act);
  return ws;
}

template <typename T>
std::span<const T> Network<T>::activation(const Workspace<T>& ws, std::size_t index) const {
  return ws.acts.at(index);
}

template <typename T>
T Network<T>::forward(const BasicParams<T>& params, std::span<const T> input) const {
  auto ws = make_workspace();
  return forward(params, input, *ws);
}

template <typename T>
T Network<T>::forward(const BasicParams<T>& params, std::span<const T> input, Workspace<T>& ws) const {
  if (input.size() != input_size()) {
    throw Error(Errc::ShapeMismatch, "input has " + std::to_string(input.size()) + " values, network expects " +
                                         std::to_string(input_size()));
  }
  check_shapes(params, spec_);
  if (!all_finite(input)) throw Error(Errc::NonFiniteActivation, "input contains NaN or Inf");
  std::copy(input.begin(), input.end(), ws.input.begin());

  const T* in = ws.input.data();
  for (std::size_t l = 0; l < plan_.size(); ++l) {
    const LayerPlan& p = plan_[l];
    T* out = ws.acts[l].data();
    switch (p.spec.kind) {
      case LayerKind::Conv: {
        const int k = p.spec.kernel;
        const Eigen::Index taps = static_cast<Eigen::Index>(p.in.channels) * k * k;
        const Eigen::Index hw = static_cast<Eigen::Index>(p.out.height) * p.out.width;
        const auto& w = params.tensors[p.weight_tensor].data;
        const auto& b = params.tensors[p.weight_tensor + 1].data;
        const ConstMatrixMap<T> weights(w.data(), p.out.channels, taps, Eigen::OuterStride<>(taps));
        const int rows = band_rows(p.in);
        for (int y0 = 0; y0 < p.in.height; y0 += rows) {
          const int y1 = std::min(p.in.height, y0 + rows);
          const Eigen::Index ncols = static_cast<Eigen::Index>(y1 - y0) * p.in.width;
          im2col_band(in, p.in, k, y0, y1, ws.col.data());
          const ConstMatrixMap<T> col(ws.col.data(), taps, ncols, Eigen::OuterStride<>(ncols));
          MatrixMap<T> dst(out + static_cast<std::size_t>(y0) * p.in.width, p.out.channels, ncols,
                           Eigen::OuterStride<>(hw));
          dst.noalias() = weights * col;
        }
        MatrixMap<T> all(out, p.out.channels, hw, Eigen::OuterStride<>(hw));
        all.colwise() += ConstVectorMap<T>(b.data(), p.out.channels);
        break;
      }
      case LayerKind::Relu:
        for (std::size_t i = 0; i < p.out.size(); ++i) out[i] = in[i] > T{0} ? in[i] : T{0};
        break;
      case LayerKind::MaxPool: {
        auto& arg = ws.argmax[l];
        const int H = p.in.height;
        const int W = p.in.width;
        std::size_t o = 0;
        for (int c = 0; c < p.out.channels; ++c) {
          const std::size_t plane = static_cast<std::size_t>(c) * H * W;
          for (int oy = 0; oy < p.out.height; ++oy) {
            for (int ox = 0; ox < p.out.width; ++ox, ++o) {
              const std::size_t base = plane + static_cast<std::size_t>(2 * oy) * W + 2 * ox;
              const std::size_t cand[4] = {base, base + 1, base + W, base + W + 1};
              std::size_t best = cand[0];
              for (int t = 1; t < 4; ++t) {
                if (in[cand[t]] > in[best]) best = cand[t];
              }
              out[o] = in[best];
              arg[o] = static_cast<std::uint32_t>(best);
            }
          }
        }
        break;
      }
      case LayerKind::Flatten:
        std::copy(in, in + p.in.size(), out);
        break;
      case LayerKind::Dense: {
        const auto& w = params.tensors[p.weight_tensor].data;
        const auto& b = params.tensors[p.weight_tensor + 1].data;
        const Eigen::Index n_in = static_cast<Eigen::Index>(p.in.size());
        const ConstMatrixMap<T> weights(w.data(), p.out.channels, n_in, Eigen::OuterStride<>(n_in));
        VectorMap<T> dst(out, p.out.channels);
        dst.noalias() = weights * ConstVectorMap<T>(in, n_in);
        dst += ConstVectorMap<T>(b.data(), p.out.channels);
        break;
      }
      case LayerKind::Sigmoid:
        out[0] = stable_sigmoid(in[0]);
        break;
    }
    if (!all_finite(std::span<const T>(out, p.out.size()))) {
      throw Error(Errc::NonFiniteActivation,
                  "layer " + std::to_string(l) + " (" + to_string(p.spec.kind) + ") produced NaN or Inf");
    }
    in = out;
  }
  return ws.acts.back()[0];
}

template <typename T>
template <typename Acc>
ExampleOutput<T> Network<T>::accumulate_gradient(const BasicParams<T>& params, std::span<const T> input,
                                                  int label, BasicParams<Acc>& accumulator,
                                                  Workspace<T>& ws) const {
  const T probability = forward(params, input, ws);
  check_shapes(accumulator, spec_);

  T* grad_out = ws.grad_a.data();  // d loss / d (output of layer l)
  T* grad_in = ws.grad_b.data();   // d loss / d (input of layer l)
  // Sigmoid + binary cross-entropy collapse to p - y at the logit.
  grad_out[0] = probability - static_cast<T>(label);

  for (std::size_t li = plan_.size() - 1; li-- > 0;) {
    const LayerPlan& p = plan_[li];
    const T* in = li == 0 ? ws.input.data() : ws.acts[li - 1].data();
    const bool need_input_grad = li > 0;
    switch (p.spec.kind) {
      case LayerKind::Conv: {
        const int k = p.spec.kernel;
        const Eigen::Index taps = static_cast<Eigen::Index>(p.in.channels) * k * k;
        const Eigen::Index hw = static_cast<Eigen::Index>(p.out.height) * p.out.width;
        const Eigen::Index cout = p.out.channels;
        const auto& w = params.tensors[p.weight_tensor].data;
        auto& acc_w = accumulator.tensors[p.weight_tensor].data;
        auto& acc_b = accumulator.tensors[p.weight_tensor + 1].data;
        const ConstMatrixMap<T> weights(w.data(), cout, taps, Eigen::OuterStride<>(taps));
        MatrixMap<Acc> acc_weights(acc_w.data(), cout, taps, Eigen::OuterStride<>(taps));
        MatrixMap<T> dweight(ws.dweight.data(), cout, taps, Eigen::OuterStride<>(taps));
        if (need_input_grad) std::fill(grad_in, grad_in + p.in.size(), T{0});

        const int rows = band_rows(p.in);
        for (int y0 = 0; y0 < p.in.height; y0 += rows) {
          const int y1 = std::min(p.in.height, y0 + rows);
          const Eigen::Index ncols = static_cast<Eigen::Index>(y1 - y0) * p.in.width;
          im2col_band(in, p.in, k, y0, y1, ws.col.data());
          const ConstMatrixMap<T> col(ws.col.data(), taps, ncols, Eigen::OuterStride<>(ncols));
          const ConstMatrixMap<T> dy(grad_out + static_cast<std::size_t>(y0) * p.in.width, cout, ncols,
                                     Eigen::OuterStride<>(hw));
          if constexpr (std::is_same_v<Acc, T>) {
            acc_weights.noalias() += dy * col.transpose();
          } else {
            dweight.noalias() = dy * col.transpose();
            acc_weights += dweight.template cast<Acc>();
          }
          if (need_input_grad) {
            MatrixMap<T> dcol(ws.dcol.data(), taps, ncols, Eigen::OuterStride<>(ncols));
            dcol.noalias() = weights.transpose() * dy;
            col2im_band_add(ws.dcol.data(), p.in, k, y0, y1, grad_in);
          }
        }
        const ConstMatrixMap<T> dy_all(grad_out, cout, hw, Eigen::OuterStride<>(hw));
        VectorMap<Acc>(acc_b.data(), cout) += dy_all.rowwise().sum().template cast<Acc>();
        break;
      }
      case LayerKind::Relu:
        for (std::size_t i = 0; i < p.in.size(); ++i) grad_in[i] = in[i] > T{0} ? grad_out[i] : T{0};
        break;
      case LayerKind::MaxPool: {
        std::fill(grad_in, grad_in + p.in.size(), T{0});
        const auto& arg = ws.argmax[li];
        for (std::size_t o = 0; o < p.out.size(); ++o) grad_in[arg[o]] += grad_out[o];
        break;
      }
      case LayerKind::Flatten:
        std::copy(grad_out, grad_out + p.out.size(), grad_in);
        break;
      case LayerKind::Dense: {
        const Eigen::Index n_in = static_cast<Eigen::Index>(p.in.size());
        const Eigen::Index n_out = p.out.channels;
        const auto& w = params.tensors[p.weight_tensor].data;
        auto& acc_w = accumulator.tensors[p.weight_tensor].data;
        auto& acc_b = accumulator.tensors[p.weight_tensor + 1].data;
        const ConstVectorMap<T> dy(grad_out, n_out);
        const ConstVectorMap<T> x(in, n_in);
        MatrixMap<Acc> acc_weights(acc_w.data(), n_out, n_in, Eigen::OuterStride<>(n_in));
        for (Eigen::Index o = 0; o < n_out; ++o) {
          if (dy[o] == T{0}) continue;
          acc_weights.row(o) += (static_cast<Acc>(dy[o]) * x.template cast<Acc>()).transpose();
        }
        VectorMap<Acc>(acc_b.data(), n_out) += dy.template cast<Acc>();
        if (need_input_grad) {
          const ConstMatrixMap<T> weights(w.data(), n_out, n_in, Eigen::OuterStride<>(n_in));
          VectorMap<T>(grad_in, n_in).noalias() = weights.transpose() * dy;
        }
        break;
      }
      case LayerKind::Sigmoid:
        // Only valid as the last layer, which the loop starts below.
        break;
    }
    std::swap(grad_out, grad_in);
  }

  return {probability, bce_loss(static_cast<double>(probability), label)};
}

template class Network<float>;
template class Network<double>;

template ExampleOutput<float> Network<float>::accumulate_gradient<float>(const BasicParams<float>&,
                                                                         std::span<const float>, int,
                                                                         BasicParams<float>&,
                                                                         Workspace<float>&) const;
template ExampleOutput<float> Network<float>::accumulate_gradient<double>(const BasicParams<float>&,
                                                                          std::span<const float>, int,
                                                                          BasicParams<double>&,
                                                                          Workspace<float>&) const;
template ExampleOutput<double> Network<double>::accumulate_gradient<double>(const BasicParams<double>&,
                                                                            std::span<const double>, int,
                                                                            BasicParams<double>&,
                                                                            Workspace<double>&) const;

float forward(const ModelParams& params, const NetworkSpec& spec, std::span<const float> input) {
  return Network<float>(spec).forward(params, input);
}

ModelParams backward(const ModelParams& params, const NetworkSpec& spec, std::span<const float> input,
                     int label) {
  Network<float> network(spec);
  auto ws = network.make_workspace();
  auto grads = zero_params<float>(spec);
  network.accumulate_gradient(params, input, label, grads, *ws);
  for (const auto& t : grads.tensors) {
    if (!all_finite(std::span<const float>(t.data))) throw Error(Errc::NonFiniteGradient, "gradient has NaN or Inf");
  }
  return grads;
}

}  // namespace coocnet::net
