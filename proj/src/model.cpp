#include "bcnn/model.hpp"

#include "bcnn/errors.hpp"
#include "bcnn/gradcheck.hpp"
#include "bcnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace bcnn {

void validate(const ModelConfig& config) {
  const std::size_t k = config.stages();
  if (k < 2) {
    throw ConfigError("model needs at least 2 stages for a top-down pass, got " +
                      std::to_string(k));
  }
  if (k > 16) {
    throw ConfigError("model stage count " + std::to_string(k) + " is unreasonably large");
  }
  for (std::uint32_t c : config.channels) {
    if (c == 0) {
      throw ConfigError("stage channel counts must be positive");
    }
  }
  if (config.input_channels == 0) {
    throw ConfigError("input_channels must be positive");
  }
  if (config.classes < 2) {
    throw ConfigError("classes must be at least 2, got " + std::to_string(config.classes));
  }
  const std::uint64_t ladder = std::uint64_t{1} << k;
  if (config.input_size == 0 || config.input_size % ladder != 0) {
    throw ConfigError("input_size " + std::to_string(config.input_size) +
                      " is not divisible by 2^" + std::to_string(k) + " = " +
                      std::to_string(ladder));
  }
}

// ---- ParameterSet ----------------------------------------------------------

template <typename T>
void BasicParameterSet<T>::add(std::string name, BasicTensor<T> value) {
  if (find(name) != nullptr) {
    throw ConsistencyError("duplicate parameter name '" + name + "'");
  }
  entries_.push_back({std::move(name), std::move(value)});
}

template <typename T>
const BasicTensor<T>* BasicParameterSet<T>::find(std::string_view name) const noexcept {
  for (const auto& e : entries_) {
    if (e.name == name) {
      return &e.value;
    }
  }
  return nullptr;
}

template <typename T>
const BasicTensor<T>& BasicParameterSet<T>::get(std::string_view name) const {
  if (const auto* t = find(name)) {
    return *t;
  }
  throw ConsistencyError("missing parameter '" + std::string(name) + "'");
}

template <typename T>
BasicTensor<T>& BasicParameterSet<T>::get(std::string_view name) {
  return const_cast<BasicTensor<T>&>(std::as_const(*this).get(name));
}

template <typename T>
std::size_t BasicParameterSet<T>::total_elements() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    n += e.value.size();
  }
  return n;
}

template <typename T>
BasicParameterSet<T> BasicParameterSet<T>::zeros_like() const {
  BasicParameterSet out;
  for (const auto& e : entries_) {
    out.add(e.name, BasicTensor<T>(e.value.shape()));
  }
  return out;
}

template <typename T>
bool BasicParameterSet<T>::all_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const auto& e) { return e.value.all_finite(); });
}

template <typename T>
bool BasicParameterSet<T>::congruent(const BasicParameterSet& other) const noexcept {
  if (other.entries_.size() != entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        entries_[i].value.shape() != other.entries_[i].value.shape()) {
      return false;
    }
  }
  return true;
}

template class BasicParameterSet<float>;
template class BasicParameterSet<double>;

// ---- layout and init -------------------------------------------------------

std::string stage_weight_name(std::size_t stage) {
  return "stage" + std::to_string(stage) + ".weight";
}
std::string stage_bias_name(std::size_t stage) { return "stage" + std::to_string(stage) + ".bias"; }
std::string refine_weight_name(std::size_t stage) {
  return "refine" + std::to_string(stage) + ".weight";
}
std::string refine_bias_name(std::size_t stage) {
  return "refine" + std::to_string(stage) + ".bias";
}

namespace {
constexpr std::size_t kKernel = 3;
constexpr std::size_t kPad = 1;
} // namespace

std::vector<ParameterSpec> parameter_layout(const ModelConfig& config) {
  validate(config);
  const std::size_t k = config.stages();
  const auto& ch = config.channels;
  std::vector<ParameterSpec> layout;
  for (std::size_t s = 1; s <= k; ++s) {
    const std::size_t cin = s == 1 ? config.input_channels : ch[s - 2];
    const std::size_t cout = ch[s - 1];
    layout.push_back({stage_weight_name(s), {cout, cin, kKernel, kKernel}, cin * kKernel * kKernel});
    layout.push_back({stage_bias_name(s), {cout}, 0});
  }
  for (std::size_t s = 1; s < k; ++s) {
    const std::size_t cin = ch[s - 1] + ch[s];
    const std::size_t cout = ch[s - 1];
    layout.push_back(
        {refine_weight_name(s), {cout, cin, kKernel, kKernel}, cin * kKernel * kKernel});
    layout.push_back({refine_bias_name(s), {cout}, 0});
  }
  const std::size_t features = ch.front() + ch.back();
  layout.push_back({std::string(kHeadWeight), {features, config.classes}, features});
  layout.push_back({std::string(kHeadBias), {config.classes}, 0});
  return layout;
}

ParameterSet build_model(const ModelConfig& config) {
  ParameterSet params;
  const auto layout = parameter_layout(config);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& spec = layout[i];
    Tensor t(spec.shape);
    if (spec.fan_in > 0) {
      Rng rng(derive_seed(config.seed, {i}));
      const double stddev = std::sqrt(2.0 / static_cast<double>(spec.fan_in));
      for (float& v : t.data()) {
        v = static_cast<float>(rng.normal() * stddev);
      }
    }
    params.add(spec.name, std::move(t));
  }
  return params;
}

// ---- forward / backward ----------------------------------------------------

namespace {

template <typename T>
std::size_t count_stages(const BasicParameterSet<T>& params) {
  std::size_t k = 0;
  while (params.find(stage_weight_name(k + 1)) != nullptr) {
    ++k;
  }
  if (k < 2) {
    throw ConsistencyError("parameter set describes " + std::to_string(k) +
                           " stages; at least 2 are required");
  }
  return k;
}

} // namespace

template <typename T>
ForwardResult<T> forward(const BasicParameterSet<T>& params, const BasicTensor<T>& batch,
                         const ForwardOptions& options) {
  const std::size_t k = count_stages(params);
  if (batch.rank() != 4) {
    throw DimensionError("forward: batch must be [B x C x S x S], got " +
                         shape_to_string(batch.shape()));
  }
  const std::size_t ladder = std::size_t{1} << k;
  if (batch.dim(2) != batch.dim(3) || batch.dim(2) % ladder != 0) {
    throw DimensionError("forward: spatial extent of " + shape_to_string(batch.shape()) +
                         " must be square and divisible by " + std::to_string(ladder));
  }

  ForwardResult<T> result;
  ForwardTrace<T>& tr = result.trace;

  // Bottom-up: F_k = maxpool2(relu(conv(F_{k-1}))).
  tr.forward_maps.reserve(k);
  const BasicTensor<T>* prev = &batch;
  for (std::size_t s = 1; s <= k; ++s) {
    auto conv = conv2d(*prev, params.get(stage_weight_name(s)), params.get(stage_bias_name(s)), 1,
                       kPad);
    auto act = relu(conv.output);
    auto pool = maxpool2(act.output);
    tr.stages.push_back({std::move(conv.context), std::move(act.context), std::move(pool.context)});
    tr.forward_maps.push_back(std::move(pool.output));
    prev = &tr.forward_maps.back();
  }

  // Top-down: B_K = F_K; B_k = relu(conv(concat(F_k, upsample2(B_{k+1})))).
  tr.topdown_maps.resize(k - 1);
  tr.refines.resize(k - 1);
  for (std::size_t s = k - 1; s >= 1; --s) {
    const BasicTensor<T>& above = s + 1 == k ? tr.forward_maps[k - 1] : tr.topdown_maps[s];
    auto up = upsample2(above);
    auto fuse = concat_channels(tr.forward_maps[s - 1], up.output);
    auto conv = conv2d(fuse.output, params.get(refine_weight_name(s)),
                       params.get(refine_bias_name(s)), 1, kPad);
    auto act = relu(conv.output);
    tr.refines[s - 1] = {std::move(up.context), std::move(fuse.context), std::move(conv.context),
                         std::move(act.context)};
    tr.topdown_maps[s - 1] = std::move(act.output);
  }

  // Head reads both streams: GAP(B_1) ++ GAP(F_K).
  auto gap_td = global_avg_pool(tr.topdown_maps.front());
  auto gap_fw = global_avg_pool(tr.forward_maps.back());
  auto fuse = concat_channels(gap_td.output, gap_fw.output);
  tr.pool_topdown = std::move(gap_td.context);
  tr.pool_forward = std::move(gap_fw.context);
  tr.head_fuse = std::move(fuse.context);
  tr.pooled = std::move(fuse.output);

  if (options.head_dropout > 0.0) {
    if (options.head_dropout >= 1.0) {
      throw ConfigError("head dropout rate must be below 1");
    }
    Rng rng(options.dropout_seed);
    const T keep_scale = static_cast<T>(1.0 / (1.0 - options.head_dropout));
    tr.dropout_scale.resize(tr.pooled.size());
    for (std::size_t i = 0; i < tr.pooled.size(); ++i) {
      tr.dropout_scale[i] = rng.uniform() < options.head_dropout ? T{0} : keep_scale;
      tr.pooled[i] *= tr.dropout_scale[i];
    }
  }

  auto head = dense(tr.pooled, params.get(kHeadWeight), params.get(kHeadBias));
  tr.head = std::move(head.context);
  result.logits = std::move(head.output);
  return result;
}

template <typename T>
BasicParameterSet<T> backward(const BasicParameterSet<T>& params, const ForwardTrace<T>& trace,
                              const BasicTensor<T>& dlogits) {
  const std::size_t k = count_stages(params);
  if (trace.stages.size() != k || trace.refines.size() != k - 1 ||
      trace.forward_maps.size() != k || trace.topdown_maps.size() != k - 1) {
    throw ConsistencyError("backward: trace holds " + std::to_string(trace.stages.size()) +
                           " stages but parameters describe " + std::to_string(k));
  }
  for (std::size_t s = 1; s <= k; ++s) {
    if (trace.stages[s - 1].conv.weight.shape() != params.get(stage_weight_name(s)).shape()) {
      throw ConsistencyError("backward: trace was not produced with these parameters (" +
                             stage_weight_name(s) + ")");
    }
  }
  if (trace.head.weight.shape() != params.get(kHeadWeight).shape()) {
    throw ConsistencyError("backward: head shape differs between trace and parameters");
  }

  BasicParameterSet<T> grads = params.zeros_like();

  auto head = dense_backward(trace.head, dlogits);
  grads.get(kHeadWeight) = std::move(head.weight);
  grads.get(kHeadBias) = std::move(head.bias);
  BasicTensor<T> dpooled = std::move(head.input);
  if (!trace.dropout_scale.empty()) {
    for (std::size_t i = 0; i < dpooled.size(); ++i) {
      dpooled[i] *= trace.dropout_scale[i];
    }
  }
  auto [dgap_td, dgap_fw] = concat_channels_backward(trace.head_fuse, dpooled);

  // dF[s-1] accumulates from the head (s = K), the fusion at stage s, and
  // the next stage's convolution; dB[s-1] from the head (s = 1) or the refine above.
  std::vector<BasicTensor<T>> dF;
  std::vector<BasicTensor<T>> dB;
  for (std::size_t s = 0; s < k; ++s) {
    dF.push_back(BasicTensor<T>::zeros_like(trace.forward_maps[s]));
  }
  for (std::size_t s = 0; s + 1 < k; ++s) {
    dB.push_back(BasicTensor<T>::zeros_like(trace.topdown_maps[s]));
  }
  dF[k - 1] += global_avg_pool_backward(trace.pool_forward, dgap_fw);
  dB[0] += global_avg_pool_backward(trace.pool_topdown, dgap_td);

  for (std::size_t s = 1; s < k; ++s) {
    const auto& rt = trace.refines[s - 1];
    auto dconv_out = relu_backward(rt.act, dB[s - 1]);
    auto conv = conv2d_backward(rt.conv, dconv_out);
    grads.get(refine_weight_name(s)) = std::move(conv.weight);
    grads.get(refine_bias_name(s)) = std::move(conv.bias);
    auto [dlateral, dup] = concat_channels_backward(rt.fuse, conv.input);
    dF[s - 1] += dlateral;
    auto dabove = upsample2_backward(rt.up, dup);
    if (s + 1 == k) {
      dF[k - 1] += dabove;
    } else {
      dB[s] += dabove;
    }
  }

  for (std::size_t s = k; s >= 1; --s) {
    const auto& st = trace.stages[s - 1];
    auto dact = maxpool2_backward(st.pool, dF[s - 1]);
    auto dconv_out = relu_backward(st.act, dact);
    auto conv = conv2d_backward(st.conv, dconv_out);
    grads.get(stage_weight_name(s)) = std::move(conv.weight);
    grads.get(stage_bias_name(s)) = std::move(conv.bias);
    if (s > 1) {
      dF[s - 2] += conv.input;
    }
  }
  return grads;
}

template <typename T>
std::vector<int> argmax_rows(const BasicTensor<T>& logits) {
  if (logits.rank() != 2) {
    throw DimensionError("argmax_rows: logits must be rank 2, got " +
                         shape_to_string(logits.shape()));
  }
  const std::size_t k = logits.dim(1);
  std::vector<int> out(logits.dim(0));
  for (std::size_t n = 0; n < out.size(); ++n) {
    const T* row = logits.raw() + n * k;
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (row[j] > row[best]) {
        best = j;
      }
    }
    out[n] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const ParameterSet& params, const Tensor& batch) {
  return argmax_rows(forward(params, batch).logits);
}

template ForwardResult<float> forward(const ParameterSet&, const Tensor&, const ForwardOptions&);
template ForwardResult<double> forward(const ParameterSetD&, const TensorD&,
                                       const ForwardOptions&);
template ParameterSet backward(const ParameterSet&, const ForwardTrace<float>&, const Tensor&);
template ParameterSetD backward(const ParameterSetD&, const ForwardTrace<double>&,
                                const TensorD&);
template std::vector<int> argmax_rows(const Tensor&);
template std::vector<int> argmax_rows(const TensorD&);

// ---- full-model gradient check --------------------------------------------

ModelConfig tiny_model_config(std::uint32_t seed) {
  ModelConfig config;
  config.input_size = 8;
  config.input_channels = 1;
  config.channels = {2, 3};
  config.classes = 3;
  config.seed = seed;
  return config;
}

ModelGradcheckReport check_model_gradients(const ModelConfig& config, std::size_t batch,
                                           std::uint64_t seed, double step) {
  const ParameterSetD params = build_model(config).cast<double>();
  Rng rng(derive_seed(seed, {0x6772616463686bULL}));
  const std::size_t s = config.input_size;
  TensorD input({batch, config.input_channels, s, s});
  for (double& v : input.data()) {
    v = rng.uniform();
  }
  std::vector<int> targets(batch);
  for (int& t : targets) {
    t = static_cast<int>(rng.index(config.classes));
  }

  auto fwd = forward(params, input);
  auto loss = softmax_xent(fwd.logits, targets);
  const ParameterSetD grads = backward(params, fwd.trace, loss.grad);

  ModelGradcheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto f = [&](const TensorD& probe) {
      ParameterSetD perturbed = params;
      perturbed[i].value = probe;
      return softmax_xent(forward(perturbed, input).logits, targets).loss;
    };
    const auto r = finite_diff_gradcheck(f, params[i].value, grads[i].value, step);
    report.tensors.push_back({params[i].name, r.max_rel_error});
    report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
  }
  return report;
}

} // namespace bcnn
