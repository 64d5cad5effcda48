#include "mtlse/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "mtlse/errors.hpp"

namespace mtlse::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require_rank(const Tensor& x, std::size_t rank, const char* who) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(who) + ": expected rank " + std::to_string(rank) + " input, got " +
                     shape_string(x.shape()));
  }
}

void require_same(const Shape& a, const Shape& b, const char* who) {
  if (a != b) throw ShapeError(std::string(who) + ": gradient shape " + shape_string(b) + " != " + shape_string(a));
}

// cols is (C*9) x (H*W) for one sample.
void im2col(const double* x, std::size_t c_in, std::size_t h, std::size_t w, double* cols) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < c_in; ++c) {
    const double* plane = x + c * hw;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        double* row = cols + ((c * 3 + ky) * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(xx + kx) - 1;
            const bool inside = sy >= 0 && sy < static_cast<std::ptrdiff_t>(h) && sx >= 0 &&
                                sx < static_cast<std::ptrdiff_t>(w);
            row[y * w + xx] = inside ? plane[sy * static_cast<std::ptrdiff_t>(w) + sx] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, std::size_t c_in, std::size_t h, std::size_t w, double* dx) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < c_in; ++c) {
    double* plane = dx + c * hw;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        const double* row = cols + ((c * 3 + ky) * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(xx + kx) - 1;
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
            plane[sy * static_cast<std::ptrdiff_t>(w) + sx] += row[y * w + xx];
          }
        }
      }
    }
  }
}

}  // namespace

void he_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values()) v = dist(rng);
}

// ---------------------------------------------------------------------------
// LeakyRelu

LeakyRelu::LeakyRelu(double slope) : slope_(slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("leaky relu slope must lie in (0, 1)");
}

std::string LeakyRelu::describe() const { return "leaky_relu slope=" + std::to_string(slope_); }

Tensor LeakyRelu::forward(const Tensor& x, Mode) {
  input_ = x;
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : slope_ * x[i];
  return y;
}

Tensor LeakyRelu::backward(const Tensor& dy) {
  require_same(input_.shape(), dy.shape(), "leaky_relu");
  Tensor dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = input_[i] > 0.0 ? dy[i] : slope_ * dy[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      weight_({out_channels, in_channels, 3, 3}),
      bias_({out_channels}) {}

std::string Conv2d::describe() const {
  return "conv3x3 in=" + std::to_string(in_channels_) + " out=" + std::to_string(out_channels_) + " pad=same";
}

Shape Conv2d::output_shape(const Shape& in) const {
  if (in.size() != 4 || in[1] != in_channels_) {
    throw ShapeError("conv3x3: expected N x " + std::to_string(in_channels_) + " x H x W, got " + shape_string(in));
  }
  return {in[0], out_channels_, in[2], in[3]};
}

std::vector<ParamRef> Conv2d::parameters() { return {{"weight", &weight_}, {"bias", &bias_}}; }

void Conv2d::initialize(Rng& rng) {
  he_uniform(weight_.value, in_channels_ * 9, rng);
  bias_.value.fill(0.0);
}

Tensor Conv2d::forward(const Tensor& x, Mode) {
  const Shape out_shape = output_shape(x.shape());
  input_ = x;
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w;
  const std::size_t k = in_channels_ * 9;
  Tensor y(out_shape);
  std::vector<double> cols(k * hw);
  ConstMapMat wm(weight_.value.data(), static_cast<Eigen::Index>(out_channels_), static_cast<Eigen::Index>(k));
  Eigen::Map<const Eigen::VectorXd> b(bias_.value.data(), static_cast<Eigen::Index>(out_channels_));
  for (std::size_t s = 0; s < n; ++s) {
    im2col(x.data() + s * in_channels_ * hw, in_channels_, h, w, cols.data());
    ConstMapMat cm(cols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
    MapMat ym(y.data() + s * out_channels_ * hw, static_cast<Eigen::Index>(out_channels_),
              static_cast<Eigen::Index>(hw));
    ym.noalias() = wm * cm;
    ym.colwise() += b;
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const std::size_t n = input_.dim(0), h = input_.dim(2), w = input_.dim(3), hw = h * w;
  require_same(output_shape(input_.shape()), dy.shape(), "conv3x3");
  const std::size_t k = in_channels_ * 9;
  Tensor dx(input_.shape());
  std::vector<double> cols(k * hw);
  std::vector<double> dcols(k * hw);
  ConstMapMat wm(weight_.value.data(), static_cast<Eigen::Index>(out_channels_), static_cast<Eigen::Index>(k));
  MapMat dwm(weight_.grad.data(), static_cast<Eigen::Index>(out_channels_), static_cast<Eigen::Index>(k));
  Eigen::Map<Eigen::VectorXd> db(bias_.grad.data(), static_cast<Eigen::Index>(out_channels_));
  for (std::size_t s = 0; s < n; ++s) {
    im2col(input_.data() + s * in_channels_ * hw, in_channels_, h, w, cols.data());
    ConstMapMat cm(cols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
    ConstMapMat dym(dy.data() + s * out_channels_ * hw, static_cast<Eigen::Index>(out_channels_),
                    static_cast<Eigen::Index>(hw));
    dwm.noalias() += dym * cm.transpose();
    db += dym.rowwise().sum();
    MapMat dcm(dcols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
    dcm.noalias() = wm.transpose() * dym;
    col2im_add(dcols.data(), in_channels_, h, w, dx.data() + s * in_channels_ * hw);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(std::size_t channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_({channels}),
      beta_({channels}),
      running_mean_({channels}, 0.0),
      running_var_({channels}, 1.0) {
  gamma_.value.fill(1.0);
}

std::string BatchNorm2d::describe() const {
  return "batch_norm channels=" + std::to_string(channels_) + " eps=" + std::to_string(eps_);
}

std::vector<ParamRef> BatchNorm2d::parameters() { return {{"gamma", &gamma_}, {"beta", &beta_}}; }

std::vector<BufferRef> BatchNorm2d::buffers() {
  return {{"running_mean", &running_mean_}, {"running_var", &running_var_}};
}

Tensor BatchNorm2d::forward(const Tensor& x, Mode mode) {
  require_rank(x, 4, "batch_norm");
  if (x.dim(1) != channels_) throw ShapeError("batch_norm: channel mismatch, got " + shape_string(x.shape()));
  const std::size_t n = x.dim(0), hw = x.dim(2) * x.dim(3);
  if (mode == Mode::Train && n < 2) {
    throw DegenerateBatch("batch_norm: train mode needs at least 2 samples, got " + std::to_string(n));
  }
  last_mode_ = mode;
  normalized_ = Tensor(x.shape());
  inv_std_.assign(channels_, 0.0);
  Tensor y(x.shape());
  const double count = static_cast<double>(n * hw);
  for (std::size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::Train) {
      for (std::size_t s = 0; s < n; ++s) {
        const double* p = x.data() + (s * channels_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) mean += p[i];
      }
      mean /= count;
      double residual = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double* p = x.data() + (s * channels_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) residual += p[i] - mean;
      }
      mean += residual / count;
      for (std::size_t s = 0; s < n; ++s) {
        const double* p = x.data() + (s * channels_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) var += (p[i] - mean) * (p[i] - mean);
      }
      var /= count;
      const double unbiased = count > 1.0 ? var * count / (count - 1.0) : var;
      running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
      running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv_std;
    const double g = gamma_.value[c];
    const double b = beta_.value[c];
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double xh = (x[off + i] - mean) * inv_std;
        normalized_[off + i] = xh;
        y[off + i] = g * xh + b;
      }
    }
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  require_same(normalized_.shape(), dy.shape(), "batch_norm");
  const std::size_t n = dy.dim(0), hw = dy.dim(2) * dy.dim(3);
  const double count = static_cast<double>(n * hw);
  Tensor dx(dy.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xh = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_dy += dy[off + i];
        sum_dy_xh += dy[off + i] * normalized_[off + i];
      }
    }
    gamma_.grad[c] += sum_dy_xh;
    beta_.grad[c] += sum_dy;
    const double g = gamma_.value[c];
    const double inv_std = inv_std_[c];
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        if (last_mode_ == Mode::Train) {
          dx[off + i] = g * inv_std / count * (count * dy[off + i] - sum_dy - normalized_[off + i] * sum_dy_xh);
        } else {
          dx[off + i] = g * inv_std * dy[off + i];
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPool2d

MaxPool2d::MaxPool2d(std::size_t window_h, std::size_t window_w) : window_h_(window_h), window_w_(window_w) {
  if (window_h == 0 || window_w == 0) throw ConfigError("max_pool: window must be positive");
}

std::string MaxPool2d::describe() const {
  return "max_pool " + std::to_string(window_h_) + "x" + std::to_string(window_w_);
}

Shape MaxPool2d::output_shape(const Shape& in) const {
  if (in.size() != 4) throw ShapeError("max_pool: expected rank-4 input, got " + shape_string(in));
  if (window_h_ > in[2] || window_w_ > in[3]) {
    throw ShapeError("max_pool: window " + std::to_string(window_h_) + "x" + std::to_string(window_w_) +
                     " larger than input " + shape_string(in));
  }
  return {in[0], in[1], in[2] / window_h_, in[3] / window_w_};
}

Tensor MaxPool2d::forward(const Tensor& x, Mode) {
  const Shape out_shape = output_shape(x.shape());
  input_shape_ = x.shape();
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = out_shape[2], ow = out_shape[3];
  Tensor y(out_shape);
  argmax_.assign(y.size(), 0);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* in = x.data() + p * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (oy * window_h_) * w + ox * window_w_;
        for (std::size_t dy = 0; dy < window_h_; ++dy) {
          for (std::size_t dx = 0; dx < window_w_; ++dx) {
            const std::size_t idx = (oy * window_h_ + dy) * w + ox * window_w_ + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        y[o] = in[best];
        argmax_[o] = p * h * w + best;
      }
    }
  }
  return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) {
  require_same(output_shape(input_shape_), dy.shape(), "max_pool");
  Tensor dx(input_shape_);
  for (std::size_t o = 0; o < dy.size(); ++o) dx[argmax_[o]] += dy[o];
  return dx;
}

// ---------------------------------------------------------------------------
// GlobalMaxPool

Shape GlobalMaxPool::output_shape(const Shape& in) const {
  if (in.size() != 4 || in[2] * in[3] == 0) {
    throw ShapeError("global_max_pool: expected non-empty rank-4 input, got " + shape_string(in));
  }
  return {in[0], in[1]};
}

Tensor GlobalMaxPool::forward(const Tensor& x, Mode) {
  const Shape out_shape = output_shape(x.shape());
  input_shape_ = x.shape();
  const std::size_t planes = x.dim(0) * x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor y(out_shape);
  argmax_.assign(planes, 0);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* in = x.data() + p * hw;
    std::size_t best = 0;
    for (std::size_t i = 1; i < hw; ++i) {
      if (in[i] > in[best]) best = i;
    }
    y[p] = in[best];
    argmax_[p] = p * hw + best;
  }
  return y;
}

Tensor GlobalMaxPool::backward(const Tensor& dy) {
  require_same(output_shape(input_shape_), dy.shape(), "global_max_pool");
  Tensor dx(input_shape_);
  for (std::size_t p = 0; p < dy.size(); ++p) dx[argmax_[p]] += dy[p];
  return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::size_t in_features, std::size_t out_features)
    : in_(in_features), out_(out_features), weight_({out_features, in_features}), bias_({out_features}) {}

std::string Linear::describe() const {
  return "linear in=" + std::to_string(in_) + " out=" + std::to_string(out_);
}

Shape Linear::output_shape(const Shape& in) const {
  if (in.empty() || in.back() != in_) {
    throw ShapeError("linear: expected last axis " + std::to_string(in_) + ", got " + shape_string(in));
  }
  Shape out = in;
  out.back() = out_;
  return out;
}

std::vector<ParamRef> Linear::parameters() { return {{"weight", &weight_}, {"bias", &bias_}}; }

void Linear::initialize(Rng& rng) {
  he_uniform(weight_.value, in_, rng);
  bias_.value.fill(0.0);
}

Tensor Linear::forward(const Tensor& x, Mode) {
  Tensor y(output_shape(x.shape()));
  input_ = x;
  const auto rows = static_cast<Eigen::Index>(x.size() / in_);
  ConstMapMat xm(x.data(), rows, static_cast<Eigen::Index>(in_));
  ConstMapMat wm(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  Eigen::Map<const Eigen::RowVectorXd> b(bias_.value.data(), static_cast<Eigen::Index>(out_));
  MapMat ym(y.data(), rows, static_cast<Eigen::Index>(out_));
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += b;
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  require_same(output_shape(input_.shape()), dy.shape(), "linear");
  const auto rows = static_cast<Eigen::Index>(input_.size() / in_);
  ConstMapMat xm(input_.data(), rows, static_cast<Eigen::Index>(in_));
  ConstMapMat dym(dy.data(), rows, static_cast<Eigen::Index>(out_));
  ConstMapMat wm(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  MapMat dwm(weight_.grad.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  Eigen::Map<Eigen::RowVectorXd> db(bias_.grad.data(), static_cast<Eigen::Index>(out_));
  dwm.noalias() += dym.transpose() * xm;
  db += dym.colwise().sum();
  Tensor dx(input_.shape());
  MapMat dxm(dx.data(), rows, static_cast<Eigen::Index>(in_));
  dxm.noalias() = dym * wm;
  return dx;
}

// ---------------------------------------------------------------------------
// FrameFlatten

Shape FrameFlatten::output_shape(const Shape& in) const {
  if (in.size() != 4) throw ShapeError("frame_flatten: expected N x C x T x F, got " + shape_string(in));
  return {in[0], in[2], in[1] * in[3]};
}

Tensor FrameFlatten::forward(const Tensor& x, Mode) {
  Tensor y(output_shape(x.shape()));
  input_shape_ = x.shape();
  const std::size_t n = x.dim(0), c = x.dim(1), t = x.dim(2), f = x.dim(3);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t tt = 0; tt < t; ++tt)
        for (std::size_t ff = 0; ff < f; ++ff)
          y[(s * t + tt) * c * f + ch * f + ff] = x[((s * c + ch) * t + tt) * f + ff];
  return y;
}

Tensor FrameFlatten::backward(const Tensor& dy) {
  require_same(output_shape(input_shape_), dy.shape(), "frame_flatten");
  Tensor dx(input_shape_);
  const std::size_t n = dx.dim(0), c = dx.dim(1), t = dx.dim(2), f = dx.dim(3);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t tt = 0; tt < t; ++tt)
        for (std::size_t ff = 0; ff < f; ++ff)
          dx[((s * c + ch) * t + tt) * f + ff] = dy[(s * t + tt) * c * f + ch * f + ff];
  return dx;
}

// ---------------------------------------------------------------------------
// GradientReversal

GradientReversal::GradientReversal(double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("grl: lambda must be finite and >= 0");
}

std::string GradientReversal::describe() const { return "grl lambda=" + std::to_string(lambda_); }

Tensor GradientReversal::forward(const Tensor& x, Mode) { return x; }

Tensor GradientReversal::backward(const Tensor& dy) {
  Tensor dx(dy.shape());
  const double scale = -lambda_;
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = scale * dy[i];
  return dx;
}

}  // namespace mtlse::nn
