#pragma once

#include <functional>
#include <span>

namespace mtlse::nn {

/// Default central-difference step.
inline constexpr double kFiniteDifferenceStep = 1e-5;

/// |analytic - numeric| / max(1, |analytic|, |numeric|)
double gradient_relative_error(double analytic, double numeric);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
};

/// Compares `analytic` against central differences of `f`, perturbing each
/// entry of `params` in place (and restoring it). `f` must read the current
/// contents of `params`. Throws NumericalError if a probe is non-finite.
GradCheckResult finite_difference_check(const std::function<double()>& f, std::span<double> params,
                                        std::span<const double> analytic, double step = kFiniteDifferenceStep);

}  // namespace mtlse::nn
