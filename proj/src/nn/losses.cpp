#include "mtlse/nn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "mtlse/errors.hpp"

namespace mtlse::nn {

namespace {

void check_onehot(std::span<const double> s) {
  int ones = 0;
  for (double v : s) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw LabelError("scene target is not one-hot");
    }
  }
  if (ones != 1) throw LabelError("scene target is not one-hot");
}

void check_binary(std::span<const double> z) {
  for (double v : z) {
    if (v != 0.0 && v != 1.0) throw LabelError("event target outside {0, 1}");
  }
}

double clamp_prob(double y) { return std::clamp(y, kProbabilityClamp, 1.0 - kProbabilityClamp); }

}  // namespace

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() == 0) return logits;
  const std::size_t width = logits.shape().back();
  Tensor out(logits.shape());
  if (width == 0) return out;
  for (std::size_t row = 0; row < logits.size() / width; ++row) {
    const auto p = softmax(logits.values().subspan(row * width, width));
    std::copy(p.begin(), p.end(), out.data() + row * width);
  }
  return out;
}

Tensor sigmoid(const Tensor& logits) {
  Tensor out(logits.shape());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = sigmoid(logits[i]);
  return out;
}

double scene_ce_loss(std::span<const double> probs, std::span<const double> onehot) {
  if (probs.size() != onehot.size()) throw ShapeError("scene_ce_loss: size mismatch");
  check_onehot(onehot);
  double loss = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    if (onehot[n] != 0.0) loss -= onehot[n] * std::log(std::max(probs[n], kProbabilityClamp));
  }
  return loss;
}

double event_bce_loss(std::span<const double> probs, std::span<const double> targets) {
  if (probs.size() != targets.size()) throw ShapeError("event_bce_loss: size mismatch");
  check_binary(targets);
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double y = clamp_prob(probs[i]);
    loss -= targets[i] * std::log(y) + (1.0 - targets[i]) * std::log(1.0 - y);
  }
  return loss;
}

void validate(const LossWeights& w) {
  if (!(w.alpha >= 0.0) || !(w.beta >= 0.0)) throw ConfigError("loss weights must be >= 0");
  if (w.alpha == 0.0 && w.beta == 0.0) throw ConfigError("loss weights alpha and beta cannot both be 0");
}

double mtl_loss(double scene_loss, double event_loss, const LossWeights& w) {
  return w.alpha * scene_loss + w.beta * event_loss;
}

LossGrad softmax_cross_entropy(const Tensor& logits, const Tensor& onehot) {
  if (logits.rank() != 2 || logits.shape() != onehot.shape()) {
    throw ShapeError("softmax_cross_entropy: logits " + shape_string(logits.shape()) + " vs targets " +
                     shape_string(onehot.shape()));
  }
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  LossGrad out{0.0, Tensor(logits.shape())};
  for (std::size_t row = 0; row < n; ++row) {
    const auto target = onehot.values().subspan(row * c, c);
    const auto y = softmax(logits.values().subspan(row * c, c));
    out.loss += scene_ce_loss(y, target);
    for (std::size_t k = 0; k < c; ++k) out.grad[row * c + k] = (y[k] - target[k]) / static_cast<double>(n);
  }
  out.loss /= static_cast<double>(n);
  return out;
}

LossGrad sigmoid_binary_cross_entropy(const Tensor& logits, const Tensor& targets) {
  if (logits.rank() < 1 || logits.shape() != targets.shape()) {
    throw ShapeError("sigmoid_binary_cross_entropy: logits " + shape_string(logits.shape()) + " vs targets " +
                     shape_string(targets.shape()));
  }
  const std::size_t n = logits.dim(0);
  const Tensor y = sigmoid(logits);
  LossGrad out{event_bce_loss(y.values(), targets.values()) / static_cast<double>(n), Tensor(logits.shape())};
  for (std::size_t i = 0; i < y.size(); ++i) out.grad[i] = (y[i] - targets[i]) / static_cast<double>(n);
  return out;
}

}  // namespace mtlse::nn
