#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace coocnet::net {

// ---------------------------------------------------------------------------
// Architecture description

enum class LayerKind : std::uint8_t {
  Conv = 1,     // stride 1, zero 'same' padding, cross-correlation
  Relu = 2,
  MaxPool = 3,  // 2x2 window, stride 2
  Flatten = 4,
  Dense = 5,
  Sigmoid = 6,
};

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int units = 0;   // output channels (conv) or output features (dense)
  int kernel = 0;  // conv kernel size, odd

  static LayerSpec conv(int channels, int kernel) { return {LayerKind::Conv, channels, kernel}; }
  static LayerSpec dense(int units) { return {LayerKind::Dense, units, 0}; }
  static LayerSpec relu() { return {LayerKind::Relu, 0, 0}; }
  static LayerSpec max_pool() { return {LayerKind::MaxPool, 0, 0}; }
  static LayerSpec flatten() { return {LayerKind::Flatten, 0, 0}; }
  static LayerSpec sigmoid() { return {LayerKind::Sigmoid, 0, 0}; }

  bool has_params() const noexcept { return kind == LayerKind::Conv || kind == LayerKind::Dense; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  int bins = 256;  // input is 3 x bins x bins
  std::vector<LayerSpec> layers;

  /// Three conv(3x3)+relu+conv(5x5)+maxpool stages with 32/64/128 channels,
  /// then flatten, dense(256)+relu, dense(256)+relu, dense(1), sigmoid.
  static NetworkSpec standard(int bins);

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Compact textual form, e.g. "3x64x64|conv32k3|relu|...".
std::string describe(const NetworkSpec& spec);

struct Shape {
  int channels = 0;
  int height = 1;
  int width = 1;
  std::size_t size() const noexcept { return static_cast<std::size_t>(channels) * height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct LayerPlan {
  LayerSpec spec;
  Shape in;
  Shape out;
  int weight_tensor = -1;  // index of the weight tensor in the parameter list, bias follows
};

/// Resolves layer shapes. Throws Error(ShapeMismatch) if the layers do not
/// chain (odd map before a pool, conv after flatten, ...) or the stack does not
/// end in dense(1) + sigmoid.
std::vector<LayerPlan> plan(const NetworkSpec& spec);

/// Shapes of all parameter tensors: for each conv/dense layer in order, the
/// weight ([out, in, k, k] or [out, in]) followed by the bias ([out]).
std::vector<std::vector<std::size_t>> parameter_shapes(const NetworkSpec& spec);

// ---------------------------------------------------------------------------
// Parameters

template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  static Tensor zeros(std::vector<std::size_t> shape);
  std::size_t size() const noexcept { return data.size(); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

template <typename T>
struct BasicParams {
  std::vector<Tensor<T>> tensors;

  std::size_t count() const noexcept;
  void set_zero();

  friend bool operator==(const BasicParams&, const BasicParams&) = default;
};

using ModelParams = BasicParams<float>;

template <typename T>
BasicParams<T> zero_params(const NetworkSpec& spec);

template <typename To, typename From>
BasicParams<To> cast_params(const BasicParams<From>& params) {
  BasicParams<To> out;
  out.tensors.reserve(params.tensors.size());
  for (const auto& t : params.tensors) {
    out.tensors.push_back({t.shape, std::vector<To>(t.data.begin(), t.data.end())});
  }
  return out;
}

/// Throws Error(ShapeMismatch) unless params match the spec exactly.
template <typename T>
void check_shapes(const BasicParams<T>& params, const NetworkSpec& spec);

/// He initialization: weights ~ N(0, 2/fan_in), biases zero. Deterministic per seed.
ModelParams init_params(const NetworkSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Loss

inline constexpr double kBceEpsilon = 1e-7;

/// -[y ln p + (1-y) ln(1-p)] with p clamped to [eps, 1-eps].
double bce_loss(double probability, int label);

// ---------------------------------------------------------------------------
// Forward / backward engine

/// 64-byte aligned storage. The vectorized GEMM kernels may round
/// differently depending on buffer alignment, so every scratch buffer gets
/// the same alignment and per-example results do not depend on which
/// workspace computed them.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Per-thread scratch buffers for Network<T>; create with make_workspace().
template <typename T>
struct Workspace {
  AlignedVector<T> input;
  std::vector<AlignedVector<T>> acts;              // output of every layer
  std::vector<std::vector<std::uint32_t>> argmax;  // pool layers only
  AlignedVector<T> col;                            // im2col band
  AlignedVector<T> dcol;
  AlignedVector<T> dweight;
  AlignedVector<T> grad_a;
  AlignedVector<T> grad_b;
};

template <typename T>
struct ExampleOutput {
  T probability{};
  double loss = 0.0;
};

/// The fixed layer stack evaluated per example. T is float for training and
/// double for gradient checking. All methods are const and thread-safe as long
/// as each thread passes its own Workspace.
template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec);
  ~Network();
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<LayerPlan>& layers() const noexcept { return plan_; }
  std::size_t input_size() const noexcept { return plan_.front().in.size(); }

  std::unique_ptr<Workspace<T>> make_workspace() const;

  /// Sigmoid output in (0, 1). Throws ShapeMismatch or NonFiniteActivation.
  T forward(const BasicParams<T>& params, std::span<const T> input, Workspace<T>& ws) const;
  T forward(const BasicParams<T>& params, std::span<const T> input) const;

  /// Runs forward + backward for one example and adds d(loss)/d(theta) into
  /// `accumulator` (which must already have the parameter shapes).
  template <typename Acc>
  ExampleOutput<T> accumulate_gradient(const BasicParams<T>& params, std::span<const T> input, int label,
                                       BasicParams<Acc>& accumulator, Workspace<T>& ws) const;

  /// Activations of layer `index` from the most recent forward on `ws`.
  std::span<const T> activation(const Workspace<T>& ws, std::size_t index) const;

 private:
  NetworkSpec spec_;
  std::vector<LayerPlan> plan_;
};

extern template class Network<float>;
extern template class Network<double>;

/// Convenience wrappers over a temporary Network<float>.
float forward(const ModelParams& params, const NetworkSpec& spec, std::span<const float> input);
ModelParams backward(const ModelParams& params, const NetworkSpec& spec, std::span<const float> input, int label);

// ---------------------------------------------------------------------------
// Batch gradients

/// Copies the features of example `index` into `out` and returns its target
/// (0 = real, 1 = gan). Must be safe to call concurrently.
using ExampleReader = std::function<int(std::size_t index, std::span<float> out)>;

struct BatchGradient {
  ModelParams mean_gradient;
  double loss_sum = 0.0;
  std::size_t correct = 0;  // threshold 0.5, ties -> gan
  std::size_t count = 0;
};

/// Mean gradient over a batch, split into `workers` contiguous ranges. Each
/// worker accumulates in double in example order and the partial sums are
/// combined in worker order, so results are reproducible for a fixed worker
/// count and agree across worker counts up to double rounding.
class BatchGradientEngine {
 public:
  BatchGradientEngine(const Network<float>& network, int workers);
  ~BatchGradientEngine();

  BatchGradient compute(const ModelParams& params, std::span<const std::size_t> indices,
                        const ExampleReader& reader);

  int workers() const noexcept { return workers_; }

 private:
  struct Slot;
  const Network<float>& network_;
  int workers_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

}  // namespace coocnet::net
