#include "ticketgan/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace tg {

namespace {

int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Image rows are viewed as (h*w) x c column-major blocks: pixel s of
// channel c sits at (s, c).
Eigen::Map<const Mat> image_view(const Eigen::VectorXd& row, const Shape3& s) {
  return Eigen::Map<const Mat>(row.data(), s.h * s.w, s.c);
}

using MatBlock = Eigen::Ref<Mat, 0, Eigen::OuterStride<>>;
using ConstMatBlock = Eigen::Ref<const Mat, 0, Eigen::OuterStride<>>;

// Valid output range [lo, hi] for which o*stride - pad + koff lands in
// [0, extent).
inline void valid_range(int out_dim, int extent, int stride, int pad, int koff,
                        int& lo, int& hi) {
  lo = pad > koff ? (pad - koff + stride - 1) / stride : 0;
  hi = std::min(out_dim - 1, (extent - 1 + pad - koff) / stride);
}

using StridedVec = Eigen::Map<Eigen::VectorXd, 0, Eigen::InnerStride<>>;
using ConstStridedVec =
    Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

// cols: (oh*ow) x (c*k*k). Column index = c*k*k + ki*k + kj.
void im2col_into(const Eigen::VectorXd& row, const Shape3& s, int k,
                 int stride, int pad, MatBlock cols) {
  const int oh = conv_out_dim(s.h, k, stride, pad);
  const int ow = conv_out_dim(s.w, k, stride, pad);
  cols.setZero();
  for (int c = 0; c < s.c; ++c) {
    const double* plane = row.data() + static_cast<Eigen::Index>(c) * s.h * s.w;
    for (int ki = 0; ki < k; ++ki) {
      int oi_lo, oi_hi;
      valid_range(oh, s.h, stride, pad, ki, oi_lo, oi_hi);
      for (int kj = 0; kj < k; ++kj) {
        const Eigen::Index col =
            static_cast<Eigen::Index>(c) * k * k + ki * k + kj;
        int oj_lo, oj_hi;
        valid_range(ow, s.w, stride, pad, kj, oj_lo, oj_hi);
        const int cnt = oj_hi - oj_lo + 1;
        if (cnt <= 0) continue;
        const int jj0 = oj_lo * stride - pad + kj;
        for (int oi = oi_lo; oi <= oi_hi; ++oi) {
          const int ii = oi * stride - pad + ki;
          ConstStridedVec src(plane + static_cast<Eigen::Index>(ii) * s.w + jj0,
                              cnt, Eigen::InnerStride<>(stride));
          cols.col(col).segment(static_cast<Eigen::Index>(oi) * ow + oj_lo,
                                cnt) = src;
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into an image row.
void col2im(const ConstMatBlock& cols, const Shape3& s, int k, int stride,
            int pad, Eigen::Ref<Eigen::VectorXd> out_row) {
  const int oh = conv_out_dim(s.h, k, stride, pad);
  const int ow = conv_out_dim(s.w, k, stride, pad);
  for (int c = 0; c < s.c; ++c) {
    double* plane = out_row.data() + static_cast<Eigen::Index>(c) * s.h * s.w;
    for (int ki = 0; ki < k; ++ki) {
      int oi_lo, oi_hi;
      valid_range(oh, s.h, stride, pad, ki, oi_lo, oi_hi);
      for (int kj = 0; kj < k; ++kj) {
        const Eigen::Index col =
            static_cast<Eigen::Index>(c) * k * k + ki * k + kj;
        int oj_lo, oj_hi;
        valid_range(ow, s.w, stride, pad, kj, oj_lo, oj_hi);
        const int cnt = oj_hi - oj_lo + 1;
        if (cnt <= 0) continue;
        const int jj0 = oj_lo * stride - pad + kj;
        for (int oi = oi_lo; oi <= oi_hi; ++oi) {
          const int ii = oi * stride - pad + ki;
          StridedVec dst(plane + static_cast<Eigen::Index>(ii) * s.w + jj0, cnt,
                         Eigen::InnerStride<>(stride));
          dst += cols.col(col).segment(static_cast<Eigen::Index>(oi) * ow +
                                           oj_lo,
                                       cnt);
        }
      }
    }
  }
}

struct SnCache {
  Eigen::VectorXd u, v;
  double sigma = 1.0;
};

// One power-iteration step; u is persisted in the store under role norm.
// sigma is computed with u and v treated as constants thereafter.
SnCache spectral_normalize(const Mat& a, Mat& u_param, bool training) {
  SnCache c;
  Eigen::VectorXd u = u_param.col(0);
  Eigen::VectorXd v = a.transpose() * u;
  double nv = v.norm();
  if (nv > 0) v /= nv;
  if (training) {
    Eigen::VectorXd u_new = a * v;
    double nu = u_new.norm();
    if (nu > 0) u_new /= nu;
    u = u_new;
    u_param.col(0) = u;
  }
  c.sigma = u.dot(a * v);
  if (std::abs(c.sigma) < 1e-12) c.sigma = 1e-12;
  c.u = u;
  c.v = v;
  return c;
}

// Gradient of L wrt raw A given G = dL/d(A/sigma), with u, v frozen.
Mat sn_backward(const Mat& g, const Mat& a_hat, double sigma,
                const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const double coupled = (g.array() * a_hat.array()).sum() / sigma;
  return g / sigma - coupled * (u * v.transpose());
}

}  // namespace

Mat orthogonal_init(Eigen::Index rows, Eigen::Index cols, Rng& rng, double gain) {
  const Eigen::Index r = std::max(rows, cols);
  Mat a(r, std::min(rows, cols));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(r, a.cols());
  Mat rmat = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (rmat(j, j) < 0) q.col(j) = -q.col(j);
  Mat out = (rows >= cols) ? q : Mat(q.transpose());
  return gain * out;
}

// --------------------------- DenseLayer ---------------------------

DenseLayer::DenseLayer(std::string prefix, Shape3 in, int out_dim, bool sn)
    : Layer(std::move(prefix), in, Shape3{out_dim, 1, 1}), sn_(sn) {}

void DenseLayer::init(ParamStore& params, Rng& rng) const {
  Mat& w = params.add(prefix_ + ".weight", in_.size(), out_.c, ParamRole::weight);
  w = orthogonal_init(in_.size(), out_.c, rng);
  params.add(prefix_ + ".bias", out_.c, 1, ParamRole::bias);
  if (sn_) {
    Mat& u = params.add(prefix_ + ".u", in_.size(), 1, ParamRole::norm);
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, 0) = rng.normal();
    u /= u.norm();
  }
}

Mat DenseLayer::forward(ParamStore& params, const Mat& x, bool training,
                        LayerCache& cache) const {
  cache["x"] = x;
  const Mat& w = params.at(prefix_ + ".weight");
  const Mat& b = params.at(prefix_ + ".bias");
  Mat w_eff = w;
  if (sn_) {
    SnCache sc = spectral_normalize(w, params.at(prefix_ + ".u"), training);
    w_eff = w / sc.sigma;
    cache["u"] = sc.u;
    cache["v"] = sc.v;
    cache["sigma"] = Mat::Constant(1, 1, sc.sigma);
    cache["w_hat"] = w_eff;
  }
  Mat y = x * w_eff;
  y.rowwise() += b.col(0).transpose();
  return y;
}

Mat DenseLayer::backward(const ParamStore& params, const Mat& dy,
                         GradStore& grads, const LayerCache& cache) const {
  const Mat& x = cache.at("x");
  const Mat& w = params.at(prefix_ + ".weight");
  Mat dw = x.transpose() * dy;
  grads[prefix_ + ".bias"] += dy.colwise().sum().transpose();
  Mat w_eff = w;
  if (sn_) {
    const double sigma = cache.at("sigma")(0, 0);
    w_eff = cache.at("w_hat");
    dw = sn_backward(dw, w_eff, sigma, cache.at("u").col(0), cache.at("v").col(0));
  }
  grads[prefix_ + ".weight"] += dw;
  return dy * w_eff.transpose();
}

// --------------------------- activations ---------------------------

Mat ReluLayer::forward(ParamStore&, const Mat& x, bool, LayerCache& cache) const {
  cache["x"] = x;
  if (slope_ == 0.0) return x.cwiseMax(0.0);
  return (x.array() >= 0).select(x, slope_ * x);
}

Mat ReluLayer::backward(const ParamStore&, const Mat& dy, GradStore&,
                        const LayerCache& cache) const {
  const Mat& x = cache.at("x");
  return (x.array() >= 0).select(dy, slope_ * dy);
}

Mat TanhLayer::forward(ParamStore&, const Mat& x, bool, LayerCache& cache) const {
  Mat y = x.array().tanh();
  cache["y"] = y;
  return y;
}

Mat TanhLayer::backward(const ParamStore&, const Mat& dy, GradStore&,
                        const LayerCache& cache) const {
  const Mat& y = cache.at("y");
  return (dy.array() * (1.0 - y.array().square())).matrix();
}

// --------------------------- Conv2dLayer ---------------------------

Conv2dLayer::Conv2dLayer(std::string prefix, Shape3 in, int out_channels,
                         int kernel, int stride, int pad, bool sn)
    : Layer(std::move(prefix), in,
            Shape3{out_channels, conv_out_dim(in.h, kernel, stride, pad),
                   conv_out_dim(in.w, kernel, stride, pad)}),
      k_(kernel), stride_(stride), pad_(pad), sn_(sn) {}

void Conv2dLayer::init(ParamStore& params, Rng& rng) const {
  const Eigen::Index fan_in = static_cast<Eigen::Index>(in_.c) * k_ * k_;
  Mat& w = params.add(prefix_ + ".weight", fan_in, out_.c, ParamRole::weight);
  w = orthogonal_init(fan_in, out_.c, rng);
  params.add(prefix_ + ".bias", out_.c, 1, ParamRole::bias);
  if (sn_) {
    Mat& u = params.add(prefix_ + ".u", fan_in, 1, ParamRole::norm);
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, 0) = rng.normal();
    u /= u.norm();
  }
}

Mat Conv2dLayer::forward(ParamStore& params, const Mat& x, bool training,
                         LayerCache& cache) const {
  const Mat& w = params.at(prefix_ + ".weight");  // (c*k*k) x outC
  const Mat& b = params.at(prefix_ + ".bias");
  Mat w_eff = w;
  if (sn_) {
    SnCache sc = spectral_normalize(w, params.at(prefix_ + ".u"), training);
    w_eff = w / sc.sigma;
    cache["u"] = sc.u;
    cache["v"] = sc.v;
    cache["sigma"] = Mat::Constant(1, 1, sc.sigma);
    cache["w_hat"] = w_eff;
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index ohw = static_cast<Eigen::Index>(out_.h) * out_.w;
  Mat all_cols(static_cast<Eigen::Index>(n) * ohw, w.rows());
  Eigen::VectorXd row(in_.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    row = x.row(i);
    im2col_into(row, in_, k_, stride_, pad_, all_cols.middleRows(i * ohw, ohw));
  }
  Mat yall = all_cols * w_eff;  // (n*oh*ow) x outC, one batched product
  yall.rowwise() += b.col(0).transpose();
  Mat y(n, out_.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < out_.c; ++c)
      y.block(i, static_cast<Eigen::Index>(c) * ohw, 1, ohw) =
          yall.col(c).segment(i * ohw, ohw).transpose();
  cache["cols"] = std::move(all_cols);
  return y;
}

Mat Conv2dLayer::backward(const ParamStore& params, const Mat& dy,
                          GradStore& grads, const LayerCache& cache) const {
  const Mat& w = params.at(prefix_ + ".weight");
  const Mat& all_cols = cache.at("cols");
  Mat w_eff = sn_ ? cache.at("w_hat") : w;
  const Eigen::Index n = dy.rows();
  const Eigen::Index ohw = static_cast<Eigen::Index>(out_.h) * out_.w;
  Mat dyall(n * ohw, out_.c);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < out_.c; ++c)
      dyall.col(c).segment(i * ohw, ohw) =
          dy.block(i, static_cast<Eigen::Index>(c) * ohw, 1, ohw).transpose();
  Mat dw = all_cols.transpose() * dyall;
  Eigen::VectorXd db = dyall.colwise().sum().transpose();
  Mat dcols = dyall * w_eff.transpose();  // (n*oh*ow) x (c*k*k)
  Mat dx = Mat::Zero(n, in_.size());
  Eigen::VectorXd dxrow(in_.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    dxrow.setZero();
    col2im(dcols.middleRows(i * ohw, ohw), in_, k_, stride_, pad_, dxrow);
    dx.row(i) = dxrow;
  }
  if (sn_) {
    const double sigma = cache.at("sigma")(0, 0);
    dw = sn_backward(dw, w_eff, sigma, cache.at("u").col(0), cache.at("v").col(0));
  }
  grads[prefix_ + ".weight"] += dw;
  grads[prefix_ + ".bias"] += db;
  return dx;
}

// ----------------------- ConvTranspose2dLayer -----------------------

ConvTranspose2dLayer::ConvTranspose2dLayer(std::string prefix, Shape3 in,
                                           int out_channels, int kernel,
                                           int stride, int pad)
    : Layer(std::move(prefix), in,
            Shape3{out_channels, (in.h - 1) * stride - 2 * pad + kernel,
                   (in.w - 1) * stride - 2 * pad + kernel}),
      k_(kernel), stride_(stride), pad_(pad) {}

void ConvTranspose2dLayer::init(ParamStore& params, Rng& rng) const {
  const Eigen::Index fan = static_cast<Eigen::Index>(out_.c) * k_ * k_;
  Mat& w = params.add(prefix_ + ".weight", fan, in_.c, ParamRole::weight);
  w = orthogonal_init(fan, in_.c, rng);
  params.add(prefix_ + ".bias", out_.c, 1, ParamRole::bias);
}

// Forward of a transposed conv is the adjoint (col2im scatter) of the
// matching strided conv over the *output* image.
Mat ConvTranspose2dLayer::forward(ParamStore& params, const Mat& x, bool,
                                  LayerCache& cache) const {
  const Mat& w = params.at(prefix_ + ".weight");  // (outC*k*k) x inC
  const Mat& b = params.at(prefix_ + ".bias");
  const Eigen::Index n = x.rows();
  const Eigen::Index ihw = static_cast<Eigen::Index>(in_.h) * in_.w;
  const Eigen::Index ohw = static_cast<Eigen::Index>(out_.h) * out_.w;
  Mat xall(n * ihw, in_.c);  // stacked (ih*iw) x inC images
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < in_.c; ++c)
      xall.col(c).segment(i * ihw, ihw) =
          x.block(i, static_cast<Eigen::Index>(c) * ihw, 1, ihw).transpose();
  Mat cols = xall * w.transpose();  // (n*ih*iw) x (outC*k*k)
  Mat y(n, out_.size());
  Eigen::VectorXd yrow(out_.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    yrow.setZero();
    col2im(cols.middleRows(i * ihw, ihw), out_, k_, stride_, pad_, yrow);
    Eigen::Map<Mat> yimg(yrow.data(), ohw, out_.c);
    yimg.rowwise() += b.col(0).transpose();
    y.row(i) = yrow;
  }
  cache["xall"] = std::move(xall);
  return y;
}

Mat ConvTranspose2dLayer::backward(const ParamStore& params, const Mat& dy,
                                   GradStore& grads,
                                   const LayerCache& cache) const {
  const Mat& w = params.at(prefix_ + ".weight");
  const Mat& xall = cache.at("xall");
  const Eigen::Index n = dy.rows();
  const Eigen::Index ihw = static_cast<Eigen::Index>(in_.h) * in_.w;
  const Eigen::Index ohw = static_cast<Eigen::Index>(out_.h) * out_.w;
  Eigen::VectorXd db = Eigen::VectorXd::Zero(out_.c);
  Mat dcols(n * ihw, w.rows());  // adjoint of the forward col2im scatter
  Eigen::VectorXd dyrow(out_.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    dyrow = dy.row(i);
    for (int c = 0; c < out_.c; ++c) db(c) += dyrow.segment(c * ohw, ohw).sum();
    im2col_into(dyrow, out_, k_, stride_, pad_,
                dcols.middleRows(i * ihw, ihw));
  }
  Mat dw = dcols.transpose() * xall;
  Mat dxall = dcols * w;  // (n*ih*iw) x inC
  Mat dx(n, in_.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < in_.c; ++c)
      dx.block(i, static_cast<Eigen::Index>(c) * ihw, 1, ihw) =
          dxall.col(c).segment(i * ihw, ihw).transpose();
  grads[prefix_ + ".weight"] += dw;
  grads[prefix_ + ".bias"] += db;
  return dx;
}

}  // namespace tg
