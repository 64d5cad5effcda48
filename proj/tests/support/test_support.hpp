#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mtlse/nn/gradcheck.hpp"
#include "mtlse/nn/layer.hpp"
#include "mtlse/tensor.hpp"

namespace mtlse::testing {

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

struct LayerGradErrors {
  double input = 0.0;
  double params = 0.0;
  double worst() const { return std::max(input, params); }
};

/// Checks a layer's backward pass against central differences of the scalar
/// sum(forward(x) * probe) for a fixed random probe.
inline LayerGradErrors check_layer_gradients(nn::Layer& layer, Tensor x, nn::Mode mode, std::uint64_t seed) {
  const Tensor y0 = layer.forward(x, mode);
  const Tensor probe = random_tensor(y0.shape(), seed ^ 0x9e3779b97f4a7c15ULL);
  auto objective = [&] {
    const Tensor y = layer.forward(x, mode);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * probe[i];
    return s;
  };
  for (auto& p : layer.parameters()) p.param->grad.fill(0.0);
  layer.forward(x, mode);
  const Tensor dx = layer.backward(probe);

  LayerGradErrors e;
  e.input = nn::finite_difference_check(objective, x.values(), dx.values()).max_relative_error;
  for (auto& p : layer.parameters()) {
    const Tensor analytic = p.param->grad;
    e.params = std::max(e.params,
                        nn::finite_difference_check(objective, p.param->value.values(), analytic.values()).max_relative_error);
  }
  return e;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace mtlse::testing
