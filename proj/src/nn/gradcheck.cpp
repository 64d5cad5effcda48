#include "mtlse/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mtlse/errors.hpp"

namespace mtlse::nn {

double gradient_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

GradCheckResult finite_difference_check(const std::function<double()>& f, std::span<double> params,
                                        std::span<const double> analytic, double step) {
  if (params.size() != analytic.size()) throw ShapeError("finite_difference_check: gradient size mismatch");
  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double plus = f();
    params[i] = saved - step;
    const double minus = f();
    params[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus) || !std::isfinite(analytic[i])) {
      throw NumericalError("finite_difference_check: non-finite probe at coordinate " + std::to_string(i));
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double err = gradient_relative_error(analytic[i], numeric);
    if (err > result.max_relative_error || i == 0) {
      result = {std::max(err, result.max_relative_error), i, analytic[i], numeric};
    }
  }
  return result;
}

}  // namespace mtlse::nn
