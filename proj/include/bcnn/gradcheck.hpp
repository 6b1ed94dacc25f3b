#pragma once

#include "bcnn/tensor.hpp"

#include <functional>

namespace bcnn {

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// Central-difference check of `analytic` against f around p.
// Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-8).
// Throws NumericError if f returns a non-finite value.
GradcheckResult finite_diff_gradcheck(const std::function<double(const TensorD&)>& f,
                                      const TensorD& p, const TensorD& analytic, double h);

} // namespace bcnn
