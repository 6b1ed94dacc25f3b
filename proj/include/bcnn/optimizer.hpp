#pragma once

#include "bcnn/model.hpp"

#include <cstdint>

namespace bcnn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  ParameterSet m;
  ParameterSet v;
  std::uint64_t t = 0;
};

// Zero moments shaped like params. Throws ConfigError on invalid hyperparameters.
AdamState adam_init(const ParameterSet& params, const AdamHyper& hyper = {});

// One bias-corrected Adam update. On shape mismatch or a non-finite gradient
// throws UpdateError and leaves both state and params untouched.
void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads);

void sgd_step(ParameterSet& params, const ParameterSet& grads, double lr);

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_global_norm(ParameterSet& grads, double max_norm);

} // namespace bcnn
