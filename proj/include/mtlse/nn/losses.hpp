#pragma once

#include <span>
#include <vector>

#include "mtlse/tensor.hpp"

namespace mtlse::nn {

/// Clamp applied to probabilities inside the cross-entropy logarithms.
inline constexpr double kProbabilityClamp = 1e-7;

/// Row-wise softmax over the last axis, max-subtracted.
Tensor softmax(const Tensor& logits);
std::vector<double> softmax(std::span<const double> logits);
Tensor sigmoid(const Tensor& logits);
double sigmoid(double v);

/// -sum_n s_n log(max(y_n, eps)) for one clip. Throws LabelError unless `onehot`
/// has exactly one 1 and zeros elsewhere.
double scene_ce_loss(std::span<const double> probs, std::span<const double> onehot);

/// -sum_{t,m} [z log y + (1 - z) log(1 - y)] with y clamped to [eps, 1 - eps].
/// Throws LabelError for targets outside {0, 1}.
double event_bce_loss(std::span<const double> probs, std::span<const double> targets);

struct LossWeights {
  double alpha = 0.0001;  // scene
  double beta = 1.0;      // event
};

void validate(const LossWeights& w);

/// alpha * scene + beta * event.
double mtl_loss(double scene_loss, double event_loss, const LossWeights& w);

struct LossGrad {
  double loss = 0.0;  // mean over the batch of the per-clip loss
  Tensor grad;        // gradient of `loss` w.r.t. the logits
};

/// Fused softmax + CE over N x C logits against N x C one-hot targets.
/// The gradient is (y - s) / N.
LossGrad softmax_cross_entropy(const Tensor& logits, const Tensor& onehot);

/// Fused sigmoid + BCE over N x T x M logits; per-clip loss sums over T and M.
/// The gradient is (y - z) / N.
LossGrad sigmoid_binary_cross_entropy(const Tensor& logits, const Tensor& targets);

}  // namespace mtlse::nn
