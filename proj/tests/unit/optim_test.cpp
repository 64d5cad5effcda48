#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>

#include "mtlse/errors.hpp"
#include "mtlse/nn/checkpoint.hpp"
#include "mtlse/nn/gradcheck.hpp"
#include "mtlse/nn/layers.hpp"
#include "mtlse/nn/losses.hpp"
#include "mtlse/nn/radam.hpp"
#include "test_support.hpp"

using namespace mtlse;
using namespace mtlse::nn;
using mtlse::testing::random_tensor;

namespace {

/// Scalar rectified Adam, written from the update equations.
struct ScalarRAdam {
  double lr, b1, b2, eps;
  double m = 0.0, v = 0.0;
  int t = 0;

  double step(double w, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double rinf = 2 / (1 - b2) - 1;
    const double b2t = std::pow(b2, t);
    const double r = rinf - 2 * t * b2t / (1 - b2t);
    if (r <= 4) return w - lr * mh;
    const double vh = std::sqrt(v / (1 - b2t));
    const double rect = std::sqrt((r - 4) / (rinf - 4) * (r - 2) / (rinf - 2) * rinf / r);
    return w - lr * rect * mh / (vh + eps);
  }
};

}  // namespace

TEST(RAdam, DefaultConstants) {
  const RAdamOptions o;
  EXPECT_EQ(o.learning_rate, 1e-3);
  EXPECT_EQ(o.beta1, 0.9);
  EXPECT_EQ(o.beta2, 0.999);
  EXPECT_EQ(o.eps, 1e-8);
}

TEST(RAdam, ZeroGradientIsFixedPoint) {
  Param p({3});
  p.value = Tensor({3}, {1.0, -2.0, 0.5});
  const Tensor start = p.value;
  RAdam opt;
  std::vector<ParamRef> refs{{"p", &p}};
  for (int i = 0; i < 20; ++i) opt.step(refs);
  EXPECT_EQ(p.value, start);
}

TEST(RAdam, FirstStepIsUnrectified) {
  EXPECT_LE(radam_rho(1, 0.999), 4.0);
  EXPECT_NEAR(radam_rho(1, 0.999), 1.0, 1e-9);
  Param p({1});
  p.grad[0] = 2.0;
  MomentState st;
  EXPECT_FALSE(radam_update(p, st, 1, RAdamOptions{}));
  EXPECT_NEAR(p.value[0], -1e-3 * 2.0, 1e-15);
}

TEST(RAdam, RectificationSwitchesOnAfterFewSteps) {
  std::size_t first = 0;
  for (std::size_t t = 1; t < 20 && !first; ++t)
    if (radam_rectified(t, 0.999)) first = t;
  EXPECT_EQ(first, 5u);
}

TEST(RAdam, MatchesScalarReimplementation) {
  const RAdamOptions o;
  Param p({1});
  p.value[0] = 0.25;
  RAdam opt(o);
  std::vector<ParamRef> refs{{"w", &p}};
  ScalarRAdam ref{o.learning_rate, o.beta1, o.beta2, o.eps};
  double w = 0.25, prev = w;
  for (int i = 0; i < 100; ++i) {
    p.grad[0] = 0.7;
    opt.step(refs);
    w = ref.step(w, 0.7);
    EXPECT_NEAR(p.value[0], w, 1e-14) << "step " << i + 1;
    EXPECT_LT(p.value[0], prev);
    prev = p.value[0];
  }
}

TEST(RAdam, NonFiniteGradientThrows) {
  Param p({2});
  p.grad[1] = std::numeric_limits<double>::quiet_NaN();
  MomentState st;
  EXPECT_THROW(radam_update(p, st, 1, RAdamOptions{}), NumericalError);
  p.grad[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(radam_update(p, st, 1, RAdamOptions{}), NumericalError);
}

TEST(GradCheck, Quadratic) {
  std::vector<double> w{3.0};
  auto f = [&] { return w[0] * w[0]; };
  const std::vector<double> analytic{6.0};
  const auto r = finite_difference_check(f, w, analytic);
  EXPECT_NEAR(r.numeric, 6.0, 1e-8);
  EXPECT_LT(r.max_relative_error, 1e-8);
  EXPECT_EQ(w[0], 3.0);
}

TEST(GradCheck, ConstantFunction) {
  std::vector<double> w{1.0, 2.0};
  const std::vector<double> analytic{0.0, 0.0};
  const auto r = finite_difference_check([] { return 4.0; }, w, analytic);
  EXPECT_EQ(r.max_relative_error, 0.0);
  EXPECT_EQ(r.numeric, 0.0);
}

TEST(GradCheck, RelativeErrorDefinition) {
  EXPECT_DOUBLE_EQ(gradient_relative_error(0.5, 0.25), 0.25);
  EXPECT_DOUBLE_EQ(gradient_relative_error(10.0, 8.0), 0.2);
}

TEST(GradCheck, NonFiniteProbeThrows) {
  std::vector<double> w{0.0};
  const std::vector<double> analytic{0.0};
  auto f = [&] { return w[0] > 0 ? std::numeric_limits<double>::infinity() : 0.0; };
  EXPECT_THROW(finite_difference_check(f, w, analytic), NumericalError);
}

TEST(GradCheck, LinearPlusCrossEntropy) {
  for (int s = 0; s < 20; ++s) {
    Linear fc(5, 3);
    Rng rng(s);
    fc.initialize(rng);
    const Tensor x = random_tensor({4, 5}, s);
    Tensor t({4, 3}, 0.0);
    for (std::size_t n = 0; n < 4; ++n) t[n * 3 + n % 3] = 1.0;
    auto f = [&] { return softmax_cross_entropy(fc.forward(x, Mode::Train), t).loss; };
    fc.weight().grad.fill(0.0);
    fc.backward(softmax_cross_entropy(fc.forward(x, Mode::Train), t).grad);
    const Tensor analytic = fc.weight().grad;
    EXPECT_LT(finite_difference_check(f, fc.weight().value.values(), analytic.values()).max_relative_error, 1e-6);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::vector<NamedTensor> entries{{"a.weight", random_tensor({2, 3, 3}, 1, -1e10, 1e10)},
                                   {"a.bias", Tensor({2}, {-0.0, 1e-308})},
                                   {"scalar", Tensor({1}, {M_PI})}};
  const std::string bytes = encode_checkpoint(entries);
  EXPECT_EQ(bytes.substr(0, 4), "MTLW");
  const auto back = decode_checkpoint(bytes);
  ASSERT_EQ(back.size(), entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, entries[i].name);
    EXPECT_EQ(back[i].tensor.shape(), entries[i].tensor.shape());
    EXPECT_EQ(std::memcmp(back[i].tensor.data(), entries[i].tensor.data(), 8 * back[i].tensor.size()), 0);
  }
  EXPECT_EQ(encode_checkpoint(back), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "mtlse_optim_test.mtlw";
  std::vector<NamedTensor> entries{{"w", random_tensor({4}, 2)}};
  save_checkpoint(path.string(), entries);
  EXPECT_EQ(load_checkpoint(path.string()), entries);
  std::filesystem::remove(path);
}

TEST(Checkpoint, MalformedInputThrows) {
  std::vector<NamedTensor> entries{{"w", random_tensor({4}, 2)}};
  const std::string bytes = encode_checkpoint(entries);
  EXPECT_THROW(decode_checkpoint("XXXX" + bytes.substr(4)), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes + "z"), FormatError);
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  EXPECT_THROW(decode_checkpoint(wrong_version), FormatError);
}
