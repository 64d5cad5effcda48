#pragma once

#include <vector>

#include "mtlse/nn/layer.hpp"

namespace mtlse::nn {

/// y = x for x > 0, slope * x otherwise. The derivative at exactly 0 is
/// taken as `slope`.
class LeakyRelu final : public Layer {
 public:
  explicit LeakyRelu(double slope = 0.01);

  std::string kind() const override { return "leaky_relu"; }
  std::string describe() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override { return in; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LeakyRelu>(*this); }

  double slope() const { return slope_; }

 private:
  double slope_;
  Tensor input_;
};

/// 3x3 cross-correlation with unit stride and same padding over
/// N x C x H x W input.
class Conv2d final : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels);

  std::string kind() const override { return "conv3x3"; }
  std::string describe() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override;
  std::vector<ParamRef> parameters() override;
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  std::size_t in_channels_;
  std::size_t out_channels_;
  Param weight_;  // out x in x 3 x 3
  Param bias_;    // out
  Tensor input_;
};

/// Per-channel batch normalization over N x C x H x W input.
class BatchNorm2d final : public Layer {
 public:
  explicit BatchNorm2d(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  std::string kind() const override { return "batch_norm"; }
  std::string describe() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override { return in; }
  std::vector<ParamRef> parameters() override;
  std::vector<BufferRef> buffers() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm2d>(*this); }

  Param& gamma() { return gamma_; }
  Param& beta() { return beta_; }
  const Tensor& running_mean() const { return running_mean_; }
  const Tensor& running_var() const { return running_var_; }

 private:
  std::size_t channels_;
  double eps_;
  double momentum_;
  Param gamma_;
  Param beta_;
  Tensor running_mean_;
  Tensor running_var_;

  Mode last_mode_ = Mode::Eval;
  Tensor normalized_;
  std::vector<double> inv_std_;
};

/// Window max pooling. Trailing rows/columns that do not fill a whole window
/// are dropped. Gradient goes to the first maximum in scan order.
class MaxPool2d final : public Layer {
 public:
  MaxPool2d(std::size_t window_h, std::size_t window_w);

  std::string kind() const override { return "max_pool"; }
  std::string describe() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2d>(*this); }

 private:
  std::size_t window_h_;
  std::size_t window_w_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

/// N x C x H x W -> N x C, maximum over each channel map.
class GlobalMaxPool final : public Layer {
 public:
  std::string kind() const override { return "global_max_pool"; }
  std::string describe() const override { return "global_max_pool"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<GlobalMaxPool>(*this); }

 private:
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

/// y = W x + b applied over the last axis; leading axes are batch axes.
class Linear final : public Layer {
 public:
  Linear(std::size_t in_features, std::size_t out_features);

  std::string kind() const override { return "linear"; }
  std::string describe() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override;
  std::vector<ParamRef> parameters() override;
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Linear>(*this); }

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  std::size_t in_;
  std::size_t out_;
  Param weight_;  // out x in
  Param bias_;
  Tensor input_;
};

/// N x C x T x F -> N x T x (C*F), channel-major within each frame.
class FrameFlatten final : public Layer {
 public:
  std::string kind() const override { return "frame_flatten"; }
  std::string describe() const override { return "frame_flatten"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<FrameFlatten>(*this); }

 private:
  Shape input_shape_;
};

/// Identity on the forward pass; multiplies the incoming gradient by -lambda.
class GradientReversal final : public Layer {
 public:
  explicit GradientReversal(double lambda = 1.0);

  std::string kind() const override { return "grl"; }
  std::string describe() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& dy) override;
  Shape output_shape(const Shape& in) const override { return in; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<GradientReversal>(*this); }

  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

/// He-style uniform fill: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
void he_uniform(Tensor& t, std::size_t fan_in, Rng& rng);

}  // namespace mtlse::nn
