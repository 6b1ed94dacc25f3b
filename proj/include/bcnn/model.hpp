#pragma once

#include "bcnn/ops.hpp"
#include "bcnn/tensor.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcnn {

// Hyperparameters of the bidirectional cascade. Each stage halves the
// resolution, so input_size must be divisible by 2^stages.
struct ModelConfig {
  std::uint32_t input_size = 64;
  std::uint32_t input_channels = 1;
  std::vector<std::uint32_t> channels{16, 32, 64};
  std::uint32_t classes = 3;
  std::uint32_t seed = 0;

  std::size_t stages() const noexcept { return channels.size(); }

  bool operator==(const ModelConfig&) const = default;
};

// Throws ConfigError when the config cannot describe a valid cascade.
void validate(const ModelConfig& config);

template <typename T>
struct NamedTensor {
  std::string name;
  BasicTensor<T> value;

  bool operator==(const NamedTensor&) const = default;
};

// Ordered set of uniquely named tensors. Used for the learnable weights and,
// with identical names and shapes, for their gradients.
template <typename T>
class BasicParameterSet {
public:
  void add(std::string name, BasicTensor<T> value);

  BasicTensor<T>& get(std::string_view name);
  const BasicTensor<T>& get(std::string_view name) const;
  const BasicTensor<T>* find(std::string_view name) const noexcept;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t total_elements() const noexcept;

  auto begin() noexcept { return entries_.begin(); }
  auto end() noexcept { return entries_.end(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  NamedTensor<T>& operator[](std::size_t i) noexcept { return entries_[i]; }
  const NamedTensor<T>& operator[](std::size_t i) const noexcept { return entries_[i]; }

  // Same names and shapes, all zero.
  BasicParameterSet zeros_like() const;
  bool all_finite() const noexcept;
  // True when names and shapes agree entry by entry.
  bool congruent(const BasicParameterSet& other) const noexcept;

  template <typename U>
  BasicParameterSet<U> cast() const {
    BasicParameterSet<U> out;
    for (const auto& e : entries_) {
      out.add(e.name, e.value.template cast<U>());
    }
    return out;
  }

  bool operator==(const BasicParameterSet&) const = default;

private:
  std::vector<NamedTensor<T>> entries_;
};

using ParameterSet = BasicParameterSet<float>;
using ParameterSetD = BasicParameterSet<double>;

extern template class BasicParameterSet<float>;
extern template class BasicParameterSet<double>;

// Names and shapes of every learnable tensor, in storage order.
struct ParameterSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in = 0; // 0 for biases
};
std::vector<ParameterSpec> parameter_layout(const ModelConfig& config);

std::string stage_weight_name(std::size_t stage);
std::string stage_bias_name(std::size_t stage);
std::string refine_weight_name(std::size_t stage);
std::string refine_bias_name(std::size_t stage);
inline constexpr std::string_view kHeadWeight = "head.weight";
inline constexpr std::string_view kHeadBias = "head.bias";

// He-normal weights (std sqrt(2 / fan_in)) and zero biases, deterministic per seed.
ParameterSet build_model(const ModelConfig& config);

// Optional dropout on the pooled head features. Off unless rate > 0.
struct ForwardOptions {
  double head_dropout = 0.0;
  std::uint64_t dropout_seed = 0;
};

template <typename T>
struct StageTrace {
  Conv2dContext<T> conv;
  ReluContext<T> act;
  MaxPool2Context<T> pool;
};

template <typename T>
struct RefineTrace {
  Upsample2Context<T> up;
  ConcatContext<T> fuse;
  Conv2dContext<T> conv;
  ReluContext<T> act;
};

// Everything backward needs. Index k-1 holds stage k (1-based as in F_k, B_k).
// The top-down map B_K is F_K itself and is not duplicated.
template <typename T>
struct ForwardTrace {
  std::vector<BasicTensor<T>> forward_maps;  // F_1..F_K
  std::vector<BasicTensor<T>> topdown_maps;  // B_1..B_{K-1}
  std::vector<StageTrace<T>> stages;         // bottom-up, application order
  std::vector<RefineTrace<T>> refines;       // index k-1 refines into B_k
  GlobalAvgPoolContext<T> pool_topdown;      // GAP(B_1)
  GlobalAvgPoolContext<T> pool_forward;      // GAP(F_K)
  ConcatContext<T> head_fuse;
  BasicTensor<T> pooled;                     // head input after dropout
  std::vector<T> dropout_scale;              // empty when dropout is off
  DenseContext<T> head;
};

template <typename T>
struct ForwardResult {
  BasicTensor<T> logits;
  ForwardTrace<T> trace;
};

template <typename T>
ForwardResult<T> forward(const BasicParameterSet<T>& params, const BasicTensor<T>& batch,
                         const ForwardOptions& options = {});

template <typename T>
BasicParameterSet<T> backward(const BasicParameterSet<T>& params, const ForwardTrace<T>& trace,
                              const BasicTensor<T>& dlogits);

// Row-wise argmax; ties go to the lowest class index.
template <typename T>
std::vector<int> argmax_rows(const BasicTensor<T>& logits);

std::vector<int> predict(const ParameterSet& params, const Tensor& batch);

// Finite-difference check of the full model loss against backward, per
// parameter tensor, evaluated in double precision.
struct TensorGradcheck {
  std::string name;
  double max_rel_error = 0.0;
};

struct ModelGradcheckReport {
  std::vector<TensorGradcheck> tensors;
  double max_rel_error = 0.0;
};

ModelConfig tiny_model_config(std::uint32_t seed);

ModelGradcheckReport check_model_gradients(const ModelConfig& config, std::size_t batch,
                                           std::uint64_t seed, double step = 1e-5);

} // namespace bcnn
