#include "bcnn/gradcheck.hpp"

#include "bcnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bcnn {

GradcheckResult finite_diff_gradcheck(const std::function<double(const TensorD&)>& f,
                                      const TensorD& p, const TensorD& analytic, double h) {
  if (analytic.shape() != p.shape()) {
    throw DimensionError("gradcheck: analytic gradient " + shape_to_string(analytic.shape()) +
                         " does not match parameter " + shape_to_string(p.shape()));
  }
  if (!(h > 0.0)) {
    throw ConfigError("gradcheck: step size must be positive");
  }
  GradcheckResult result;
  TensorD probe = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + h;
    const double plus = f(probe);
    probe[i] = original - h;
    const double minus = f(probe);
    probe[i] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("gradcheck: non-finite function value at coordinate " +
                         std::to_string(i));
    }
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double rel = std::abs(a - numeric) / denom;
    if (i == 0 || rel > result.max_rel_error) {
      result = {rel, i, a, numeric};
    }
  }
  return result;
}

} // namespace bcnn
