#include "mtlse/nn/gru.hpp"

#include <Eigen/Core>
#include <cmath>

#include "mtlse/errors.hpp"
#include "mtlse/nn/layers.hpp"

namespace mtlse::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using Eigen::Index;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

Gru::Gru(std::size_t input_size, std::size_t units, bool reverse)
    : input_size_(input_size),
      units_(units),
      reverse_(reverse),
      w_({3 * units, input_size}),
      u_({3 * units, units}),
      b_({3 * units}) {}

std::vector<ParamRef> Gru::parameters() {
  return {{"input_weight", &w_}, {"recurrent_weight", &u_}, {"bias", &b_}};
}

void Gru::initialize(Rng& rng) {
  he_uniform(w_.value, input_size_, rng);
  he_uniform(u_.value, units_, rng);
  b_.value.fill(0.0);
}

Tensor Gru::forward(const Tensor& x) {
  if (x.rank() != 3 || x.dim(2) != input_size_ || x.dim(1) == 0) {
    throw ShapeError("gru: expected N x T x " + std::to_string(input_size_) + " with T >= 1, got " +
                     shape_string(x.shape()));
  }
  input_ = x;
  const std::size_t n = x.dim(0), steps = x.dim(1), u = units_, g3 = 3 * units_;
  const auto ni = static_cast<Index>(n), ui = static_cast<Index>(u);

  // Input projections for all frames at once: (N*T) x 3U.
  RowMat gx = ConstMapMat(x.data(), static_cast<Index>(n * steps), static_cast<Index>(input_size_)) *
              ConstMapMat(w_.value.data(), static_cast<Index>(g3), static_cast<Index>(input_size_)).transpose();
  gx.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b_.value.data(), static_cast<Index>(g3));

  ConstMapMat uz(u_.value.data(), ui, ui);
  ConstMapMat ur(u_.value.data() + u * u, ui, ui);
  ConstMapMat un(u_.value.data() + 2 * u * u, ui, ui);

  h_prev_.assign(steps, {});
  z_.assign(steps, {});
  r_.assign(steps, {});
  n_.assign(steps, {});

  Tensor out({n, steps, u});
  RowMat h = RowMat::Zero(ni, ui);
  RowMat hz(ni, ui), hr(ni, ui), hn(ni, ui), rh(ni, ui);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse_ ? steps - 1 - s : s;
    hz.noalias() = h * uz.transpose();
    hr.noalias() = h * ur.transpose();
    h_prev_[s].assign(h.data(), h.data() + n * u);
    z_[s].resize(n * u);
    r_[s].resize(n * u);
    n_[s].resize(n * u);
    for (std::size_t i = 0; i < n; ++i) {
      const double* a = gx.data() + (i * steps + t) * g3;
      for (std::size_t j = 0; j < u; ++j) {
        const double zv = sigmoid(a[j] + hz(static_cast<Index>(i), static_cast<Index>(j)));
        const double rv = sigmoid(a[u + j] + hr(static_cast<Index>(i), static_cast<Index>(j)));
        z_[s][i * u + j] = zv;
        r_[s][i * u + j] = rv;
        rh(static_cast<Index>(i), static_cast<Index>(j)) = rv * h(static_cast<Index>(i), static_cast<Index>(j));
      }
    }
    hn.noalias() = rh * un.transpose();
    for (std::size_t i = 0; i < n; ++i) {
      const double* a = gx.data() + (i * steps + t) * g3;
      for (std::size_t j = 0; j < u; ++j) {
        const double nv = std::tanh(a[2 * u + j] + hn(static_cast<Index>(i), static_cast<Index>(j)));
        n_[s][i * u + j] = nv;
        const double zv = z_[s][i * u + j];
        double& hv = h(static_cast<Index>(i), static_cast<Index>(j));
        hv = (1.0 - zv) * nv + zv * hv;
        out[(i * steps + t) * u + j] = hv;
      }
    }
  }
  return out;
}

Tensor Gru::backward(const Tensor& dy) {
  const std::size_t n = input_.dim(0), steps = input_.dim(1), u = units_, g3 = 3 * units_;
  if (dy.shape() != Shape{n, steps, u}) throw ShapeError("gru: gradient shape " + shape_string(dy.shape()));
  const auto ni = static_cast<Index>(n), ui = static_cast<Index>(u);

  ConstMapMat uz(u_.value.data(), ui, ui);
  ConstMapMat ur(u_.value.data() + u * u, ui, ui);
  ConstMapMat un(u_.value.data() + 2 * u * u, ui, ui);
  MapMat duz(u_.grad.data(), ui, ui);
  MapMat dur(u_.grad.data() + u * u, ui, ui);
  MapMat dun(u_.grad.data() + 2 * u * u, ui, ui);

  // Pre-activation gradients for all frames: (N*T) x 3U, laid out like gx.
  RowMat dgx = RowMat::Zero(static_cast<Index>(n * steps), static_cast<Index>(g3));
  RowMat dh_next = RowMat::Zero(ni, ui);
  RowMat daz(ni, ui), dar(ni, ui), dan(ni, ui), drh(ni, ui), hp(ni, ui), rh(ni, ui), dh_prev(ni, ui);

  for (std::size_t s = steps; s-- > 0;) {
    const std::size_t t = reverse_ ? steps - 1 - s : s;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < u; ++j) {
        const std::size_t k = i * u + j;
        const auto ii = static_cast<Index>(i), jj = static_cast<Index>(j);
        const double dh = dy[(i * steps + t) * u + j] + dh_next(ii, jj);
        const double zv = z_[s][k], nv = n_[s][k], hpv = h_prev_[s][k];
        hp(ii, jj) = hpv;
        rh(ii, jj) = r_[s][k] * hpv;
        dan(ii, jj) = dh * (1.0 - zv) * (1.0 - nv * nv);
        daz(ii, jj) = dh * (hpv - nv) * zv * (1.0 - zv);
        dh_prev(ii, jj) = dh * zv;
      }
    }
    drh.noalias() = dan * un;
    dun.noalias() += dan.transpose() * rh;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < u; ++j) {
        const std::size_t k = i * u + j;
        const auto ii = static_cast<Index>(i), jj = static_cast<Index>(j);
        const double rv = r_[s][k];
        dar(ii, jj) = drh(ii, jj) * hp(ii, jj) * rv * (1.0 - rv);
        dh_prev(ii, jj) += drh(ii, jj) * rv;
      }
    }
    duz.noalias() += daz.transpose() * hp;
    dur.noalias() += dar.transpose() * hp;
    dh_prev.noalias() += daz * uz;
    dh_prev.noalias() += dar * ur;
    for (std::size_t i = 0; i < n; ++i) {
      double* row = dgx.data() + (i * steps + t) * g3;
      for (std::size_t j = 0; j < u; ++j) {
        const auto ii = static_cast<Index>(i), jj = static_cast<Index>(j);
        row[j] = daz(ii, jj);
        row[u + j] = dar(ii, jj);
        row[2 * u + j] = dan(ii, jj);
      }
    }
    dh_next = dh_prev;
  }

  ConstMapMat xm(input_.data(), static_cast<Index>(n * steps), static_cast<Index>(input_size_));
  ConstMapMat wm(w_.value.data(), static_cast<Index>(g3), static_cast<Index>(input_size_));
  MapMat dwm(w_.grad.data(), static_cast<Index>(g3), static_cast<Index>(input_size_));
  dwm.noalias() += dgx.transpose() * xm;
  Eigen::Map<Eigen::RowVectorXd>(b_.grad.data(), static_cast<Index>(g3)) += dgx.colwise().sum();
  Tensor dx(input_.shape());
  MapMat(dx.data(), static_cast<Index>(n * steps), static_cast<Index>(input_size_)).noalias() = dgx * wm;
  return dx;
}

// ---------------------------------------------------------------------------

BiGru::BiGru(std::size_t input_size, std::size_t units)
    : input_size_(input_size), units_(units), fwd_(input_size, units, false), bwd_(input_size, units, true) {}

std::string BiGru::describe() const {
  return "bigru in=" + std::to_string(input_size_) + " units=" + std::to_string(units_);
}

Shape BiGru::output_shape(const Shape& in) const {
  if (in.size() != 3 || in[2] != input_size_ || in[1] == 0) {
    throw ShapeError("bigru: expected N x T x " + std::to_string(input_size_) + ", got " + shape_string(in));
  }
  return {in[0], in[1], 2 * units_};
}

std::vector<ParamRef> BiGru::parameters() {
  std::vector<ParamRef> out;
  for (auto& p : fwd_.parameters()) out.push_back({"fwd." + p.name, p.param});
  for (auto& p : bwd_.parameters()) out.push_back({"bwd." + p.name, p.param});
  return out;
}

void BiGru::initialize(Rng& rng) {
  fwd_.initialize(rng);
  bwd_.initialize(rng);
}

Tensor BiGru::forward(const Tensor& x, Mode) {
  const Shape out_shape = output_shape(x.shape());
  const Tensor hf = fwd_.forward(x);
  const Tensor hb = bwd_.forward(x);
  Tensor y(out_shape);
  const std::size_t frames = x.dim(0) * x.dim(1);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t j = 0; j < units_; ++j) {
      y[f * 2 * units_ + j] = hf[f * units_ + j];
      y[f * 2 * units_ + units_ + j] = hb[f * units_ + j];
    }
  }
  return y;
}

Tensor BiGru::backward(const Tensor& dy) {
  if (dy.rank() != 3 || dy.dim(2) != 2 * units_) throw ShapeError("bigru: gradient shape " + shape_string(dy.shape()));
  const std::size_t frames = dy.dim(0) * dy.dim(1);
  Tensor df({dy.dim(0), dy.dim(1), units_});
  Tensor db({dy.dim(0), dy.dim(1), units_});
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t j = 0; j < units_; ++j) {
      df[f * units_ + j] = dy[f * 2 * units_ + j];
      db[f * units_ + j] = dy[f * 2 * units_ + units_ + j];
    }
  }
  Tensor dx = fwd_.backward(df);
  const Tensor dxb = bwd_.backward(db);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dxb[i];
  return dx;
}

}  // namespace mtlse::nn
