#include "mtlse/nn/radam.hpp"

#include <cmath>

#include "mtlse/errors.hpp"

namespace mtlse::nn {

double radam_rho(std::size_t step, double beta2) {
  const double rho_inf = 2.0 / (1.0 - beta2) - 1.0;
  const double t = static_cast<double>(step);
  const double b2t = std::pow(beta2, t);
  return rho_inf - 2.0 * t * b2t / (1.0 - b2t);
}

bool radam_rectified(std::size_t step, double beta2) { return radam_rho(step, beta2) > 4.0; }

bool radam_update(Param& p, MomentState& state, std::size_t step, const RAdamOptions& opt) {
  if (step == 0) throw ConfigError("radam: step counter starts at 1");
  if (!p.grad.all_finite()) throw NumericalError("radam: non-finite gradient");
  if (state.m.shape() != p.value.shape()) {
    state.m = Tensor(p.value.shape());
    state.v = Tensor(p.value.shape());
  }
  const double t = static_cast<double>(step);
  const double bias1 = 1.0 - std::pow(opt.beta1, t);
  const double bias2 = 1.0 - std::pow(opt.beta2, t);
  const double rho_inf = 2.0 / (1.0 - opt.beta2) - 1.0;
  const double rho = radam_rho(step, opt.beta2);
  const bool rectified = rho > 4.0;
  const double rect =
      rectified ? std::sqrt((rho - 4.0) * (rho - 2.0) * rho_inf / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho)) : 0.0;

  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double g = p.grad[i];
    state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * g;
    state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    if (rectified) {
      const double v_hat = std::sqrt(state.v[i] / bias2);
      p.value[i] -= opt.learning_rate * rect * m_hat / (v_hat + opt.eps);
    } else {
      p.value[i] -= opt.learning_rate * m_hat;
    }
  }
  if (!p.value.all_finite()) throw NumericalError("radam: parameter became non-finite");
  return rectified;
}

void RAdam::step(std::span<const ParamRef> params) {
  if (states_.empty()) states_.resize(params.size());
  if (states_.size() != params.size()) throw ShapeError("radam: parameter list changed between steps");
  ++step_;
  for (std::size_t i = 0; i < params.size(); ++i) radam_update(*params[i].param, states_[i], step_, options_);
}

}  // namespace mtlse::nn
