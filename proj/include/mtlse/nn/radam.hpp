#pragma once

#include <span>
#include <vector>

#include "mtlse/tensor.hpp"

namespace mtlse::nn {

struct RAdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct MomentState {
  Tensor m;
  Tensor v;
};

/// Length of the approximated simple moving average at `step` (1-based):
/// rho_inf - 2 t beta2^t / (1 - beta2^t).
double radam_rho(std::size_t step, double beta2);

/// True when the variance rectification is tractable (rho_t > 4) and the
/// adaptive step is used.
bool radam_rectified(std::size_t step, double beta2);

/// One rectified-Adam update of `p` from `p.grad`. Returns whether the
/// adaptive branch was taken. Throws NumericalError on a non-finite gradient.
bool radam_update(Param& p, MomentState& state, std::size_t step, const RAdamOptions& opt);

/// Optimizer state for an ordered parameter list.
class RAdam {
 public:
  explicit RAdam(RAdamOptions options = {}) : options_(options) {}

  /// Advances the step counter and updates every parameter. The list must
  /// have the same order and shapes on every call.
  void step(std::span<const ParamRef> params);

  std::size_t steps() const { return step_; }
  const RAdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

 private:
  RAdamOptions options_;
  std::size_t step_ = 0;
  std::vector<MomentState> states_;
};

}  // namespace mtlse::nn
