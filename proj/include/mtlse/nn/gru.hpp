#pragma once

#include <vector>

#include "mtlse/nn/layer.hpp"

namespace mtlse::nn {

/// Single-direction gated recurrent unit over N x T x F input, zero initial
/// state, reset gate applied to the previous state before the candidate
/// projection:
///
///   z = sigmoid(Wz x + Uz h + bz)
///   r = sigmoid(Wr x + Ur h + br)
///   n = tanh(Wn x + Un (r * h) + bn)
///   h' = (1 - z) * n + z * h
///
/// Gate rows are stacked [z; r; n] in `input_weight` (3U x F),
/// `recurrent_weight` (3U x U) and `bias` (3U).
class Gru {
 public:
  Gru(std::size_t input_size, std::size_t units, bool reverse);

  /// Returns N x T x U hidden states in input time order.
  Tensor forward(const Tensor& x);
  /// dy is N x T x U; returns N x T x F.
  Tensor backward(const Tensor& dy);

  std::vector<ParamRef> parameters();
  void initialize(Rng& rng);

  Param& input_weight() { return w_; }
  Param& recurrent_weight() { return u_; }
  Param& bias() { return b_; }
  std::size_t units() const { return units_; }

 private:
  std::size_t input_size_;
  std::size_t units_;
  bool reverse_;
  Param w_;
  Param u_;
  Param b_;

  // Per-step caches, indexed by processing step, each N x U.
  Tensor input_;
  std::vector<std::vector<double>> h_prev_, z_, r_, n_;
};

/// Forward and time-reversed GRUs with outputs concatenated per frame:
/// N x T x F -> N x T x 2U.
class BiGru final : public Layer {
 public:
  BiGru(std::size_t input_size, std::size_t units);

  std::string kind() const override { return "bigru"; }
  std::string describe() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override;
  std::vector<ParamRef> parameters() override;
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BiGru>(*this); }

  Gru& forward_cell() { return fwd_; }
  Gru& backward_cell() { return bwd_; }

 private:
  std::size_t input_size_;
  std::size_t units_;
  Gru fwd_;
  Gru bwd_;
};

}  // namespace mtlse::nn
