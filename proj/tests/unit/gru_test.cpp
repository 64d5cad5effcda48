#include <gtest/gtest.h>

#include <cmath>

#include "mtlse/errors.hpp"
#include "mtlse/nn/gru.hpp"
#include "test_support.hpp"

using namespace mtlse;
using namespace mtlse::nn;
using mtlse::testing::check_layer_gradients;
using mtlse::testing::random_tensor;

namespace {

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// One GRU step from zero state, written out per unit.
std::vector<double> step_from_zero(Gru& g, std::span<const double> x) {
  const std::size_t u = g.units(), f = x.size();
  std::vector<double> h(u);
  for (std::size_t j = 0; j < u; ++j) {
    double az = g.bias().value[j], an = g.bias().value[2 * u + j];
    for (std::size_t k = 0; k < f; ++k) {
      az += g.input_weight().value[j * f + k] * x[k];
      an += g.input_weight().value[(2 * u + j) * f + k] * x[k];
    }
    h[j] = (1.0 - sig(az)) * std::tanh(an);
  }
  return h;
}

}  // namespace

TEST(BiGru, SingleFrameIsTwoIndependentSteps) {
  BiGru layer(4, 3);
  Rng rng(8);
  layer.initialize(rng);
  const Tensor x = random_tensor({1, 1, 4}, 21);
  const Tensor y = layer.forward(x, Mode::Eval);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 6}));
  const auto hf = step_from_zero(layer.forward_cell(), x.values());
  const auto hb = step_from_zero(layer.backward_cell(), x.values());
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(y[j], hf[j], 1e-14);
    EXPECT_NEAR(y[3 + j], hb[j], 1e-14);
  }
}

TEST(Gru, ZeroWeightsFollowClosedForm) {
  const double bz = 0.3, br = -0.2, bn = 0.8;
  Gru g(2, 2, false);
  for (std::size_t j = 0; j < 2; ++j) {
    g.bias().value[j] = bz;
    g.bias().value[2 + j] = br;
    g.bias().value[4 + j] = bn;
  }
  const std::size_t steps = 7;
  const Tensor y = g.forward(random_tensor({1, steps, 2}, 5));
  // h_t = (1 - z) n + z h_{t-1} with constant z, n gives h_t = n (1 - z^t).
  const double z = sig(bz), n = std::tanh(bn);
  for (std::size_t t = 0; t < steps; ++t) {
    const double expected = n * (1.0 - std::pow(z, static_cast<double>(t + 1)));
    EXPECT_NEAR(y[t * 2], expected, 1e-14);
    EXPECT_NEAR(y[t * 2 + 1], expected, 1e-14);
  }
}

TEST(Gru, AllZeroParametersKeepStateAtZero) {
  Gru g(3, 2, true);
  const Tensor y = g.forward(random_tensor({2, 4, 3}, 1));
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(Gru, ReverseCellReadsTimeBackwards) {
  Gru fwd(2, 3, false), bwd(2, 3, true);
  Rng rng(4);
  fwd.initialize(rng);
  bwd.input_weight().value = fwd.input_weight().value;
  bwd.recurrent_weight().value = fwd.recurrent_weight().value;
  bwd.bias().value = fwd.bias().value;
  const std::size_t steps = 5;
  const Tensor x = random_tensor({1, steps, 2}, 6);
  Tensor flipped(x.shape());
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t k = 0; k < 2; ++k) flipped[t * 2 + k] = x[(steps - 1 - t) * 2 + k];
  const Tensor a = fwd.forward(flipped);
  const Tensor b = bwd.forward(x);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(b[t * 3 + j], a[(steps - 1 - t) * 3 + j]);
}

TEST(BiGru, ShapeErrors) {
  BiGru layer(6, 3);
  EXPECT_THROW(layer.forward(Tensor({1, 5, 5}), Mode::Eval), ShapeError);
  EXPECT_THROW(layer.forward(Tensor({1, 0, 6}), Mode::Eval), ShapeError);
}

TEST(BiGru, BackpropThroughTimeMatchesFiniteDifferences) {
  for (int s = 0; s < 20; ++s) {
    BiGru layer(6, 3);
    Rng rng(s);
    layer.initialize(rng);
    for (auto& p : layer.parameters())
      if (p.name.find("bias") != std::string::npos)
        for (auto& v : p.param->value.values()) v = 0.2 * std::sin(static_cast<double>(s) + v + 1.0);
    const auto e = check_layer_gradients(layer, random_tensor({2, 5, 6}, 100 + s), Mode::Train, s);
    EXPECT_LT(e.worst(), 1e-4) << "seed " << s;
  }
}
