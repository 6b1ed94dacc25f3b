#include "bcnn/optimizer.hpp"

#include "bcnn/errors.hpp"

#include <cmath>

namespace bcnn {

namespace {

void check_update(const ParameterSet& params, const ParameterSet& grads) {
  if (!params.congruent(grads)) {
    throw UpdateError("gradient set is not congruent with the parameter set");
  }
  for (const auto& g : grads) {
    if (!g.value.all_finite()) {
      throw UpdateError("non-finite gradient in '" + g.name + "'");
    }
  }
}

} // namespace

AdamState adam_init(const ParameterSet& params, const AdamHyper& hyper) {
  if (!(hyper.lr > 0.0) || !std::isfinite(hyper.lr)) {
    throw ConfigError("adam: learning rate must be positive");
  }
  if (!(hyper.beta1 >= 0.0 && hyper.beta1 < 1.0) || !(hyper.beta2 >= 0.0 && hyper.beta2 < 1.0)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(hyper.eps > 0.0)) {
    throw ConfigError("adam: epsilon must be positive");
  }
  return AdamState{hyper, params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads) {
  check_update(params, grads);
  if (!params.congruent(state.m)) {
    throw UpdateError("adam state does not match the parameter set");
  }
  const std::uint64_t t = state.t + 1;
  const auto& h = state.hyper;
  const double correct1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double correct2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].value.data();
    auto m = state.m[i].value.data();
    auto v = state.v[i].value.data();
    const auto g = grads[i].value.data();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double gj = g[j];
      const double mj = h.beta1 * m[j] + (1.0 - h.beta1) * gj;
      const double vj = h.beta2 * v[j] + (1.0 - h.beta2) * gj * gj;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      const double mhat = mj / correct1;
      const double vhat = vj / correct2;
      theta[j] = static_cast<float>(theta[j] - h.lr * mhat / (std::sqrt(vhat) + h.eps));
    }
  }
  state.t = t;
}

void sgd_step(ParameterSet& params, const ParameterSet& grads, double lr) {
  if (!(lr > 0.0)) {
    throw ConfigError("sgd: learning rate must be positive");
  }
  check_update(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].value.data();
    const auto g = grads[i].value.data();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      theta[j] = static_cast<float>(theta[j] - lr * static_cast<double>(g[j]));
    }
  }
}

double clip_global_norm(ParameterSet& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (float x : g.value.data()) {
      sq += static_cast<double>(x) * x;
    }
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& g : grads) {
      for (float& x : g.value.data()) {
        x = static_cast<float>(x * scale);
      }
    }
  }
  return norm;
}

} // namespace bcnn
