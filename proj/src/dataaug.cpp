#include "ticketgan/dataaug.hpp"

#include <stdexcept>

namespace tg {

void AugPolicy::validate() const {
  if (translation_ratio < 0 || translation_ratio > 1 || cutout_ratio < 0 ||
      cutout_ratio > 1)
    throw std::invalid_argument("augmentation ratios must lie in [0,1]");
  if (brightness_range < 0 || saturation_range < 0 || contrast_range < 0)
    throw std::invalid_argument("color ranges must be non-negative");
}

namespace {

using ImgView = Eigen::Map<Mat>;          // (h*w) x c
using CImgView = Eigen::Map<const Mat>;

void translate(ImgView img, const Shape3& s, int si, int sj) {
  if (si == 0 && sj == 0) return;
  Mat src = img;
  img.setZero();
  for (int i = 0; i < s.h; ++i) {
    const int ii = i - si;
    if (ii < 0 || ii >= s.h) continue;
    for (int j = 0; j < s.w; ++j) {
      const int jj = j - sj;
      if (jj < 0 || jj >= s.w) continue;
      img.row(static_cast<Eigen::Index>(i) * s.w + j) =
          src.row(static_cast<Eigen::Index>(ii) * s.w + jj);
    }
  }
}

void cutout(ImgView img, const Shape3& s, int ti, int tj, int side) {
  for (int i = ti; i < std::min(ti + side, s.h); ++i)
    for (int j = tj; j < std::min(tj + side, s.w); ++j)
      img.row(static_cast<Eigen::Index>(i) * s.w + j).setZero();
}

}  // namespace

Mat apply_policy(const Mat& images, Shape3 shape, const AugPolicy& policy,
                 Rng& rng, AugContext* ctx) {
  policy.validate();
  if (images.cols() != shape.size())
    throw std::invalid_argument("image batch does not match declared shape");
  AugContext local;
  local.shape = shape;
  local.policy = policy;
  local.draws.assign(static_cast<std::size_t>(images.rows()), AugDraw{});
  // point data: the policy reduces to the identity
  if ((shape.h == 1 && shape.w == 1) || policy.identity()) {
    if (ctx) *ctx = std::move(local);
    return images;
  }

  const int trans = static_cast<int>(policy.translation_ratio * shape.h);
  const int side = static_cast<int>(policy.cutout_ratio * shape.h);
  for (Eigen::Index b = 0; b < images.rows(); ++b) {
    AugDraw d;
    if (policy.brightness_range > 0)
      d.brightness = rng.uniform(-policy.brightness_range, policy.brightness_range);
    if (policy.saturation_range > 0)
      d.saturation = rng.uniform(1.0 - policy.saturation_range,
                                 1.0 + policy.saturation_range);
    if (policy.contrast_range > 0)
      d.contrast = rng.uniform(1.0 - policy.contrast_range,
                               1.0 + policy.contrast_range);
    if (trans > 0) {
      d.shift_i = static_cast<int>(rng.uniform_int(2 * trans + 1)) - trans;
      d.shift_j = static_cast<int>(rng.uniform_int(2 * trans + 1)) - trans;
    }
    if (side > 0) {
      // top-left drawn so the full square stays inside the image
      d.cut_ci = static_cast<int>(rng.uniform_int(shape.h - side + 1));
      d.cut_cj = static_cast<int>(rng.uniform_int(shape.w - side + 1));
    }
    local.draws[static_cast<std::size_t>(b)] = d;
  }
  Mat out = aug_forward_with_draws(images, local);
  if (ctx) *ctx = std::move(local);
  return out;
}

Mat aug_forward_with_draws(const Mat& images, const AugContext& ctx) {
  const Shape3& shape = ctx.shape;
  const AugPolicy& policy = ctx.policy;
  if ((shape.h == 1 && shape.w == 1) || policy.identity()) return images;
  const int trans = static_cast<int>(policy.translation_ratio * shape.h);
  const int side = static_cast<int>(policy.cutout_ratio * shape.h);
  Mat out = images;
  for (Eigen::Index b = 0; b < images.rows(); ++b) {
    const AugDraw& d = ctx.draws[static_cast<std::size_t>(b)];
    Eigen::VectorXd row = out.row(b);
    ImgView img(row.data(), static_cast<Eigen::Index>(shape.h) * shape.w, shape.c);
    if (policy.brightness_range > 0) img.array() += d.brightness;
    if (policy.saturation_range > 0) {
      const Eigen::VectorXd mean = img.rowwise().mean();
      img = (mean * Eigen::RowVectorXd::Ones(shape.c)) +
            d.saturation * (img.colwise() - mean);
    }
    if (policy.contrast_range > 0) {
      const double m = img.mean();
      img = (d.contrast * (img.array() - m) + m).matrix();
    }
    if (trans > 0) translate(img, shape, d.shift_i, d.shift_j);
    if (side > 0) cutout(img, shape, d.cut_ci, d.cut_cj, side);
    out.row(b) = row;
  }
  return out;
}

Mat aug_backward(const Mat& d_out, const AugContext& ctx) {
  const Shape3& s = ctx.shape;
  const AugPolicy& p = ctx.policy;
  if ((s.h == 1 && s.w == 1) || p.identity()) return d_out;
  const int trans = static_cast<int>(p.translation_ratio * s.h);
  const int side = static_cast<int>(p.cutout_ratio * s.h);
  Mat dx = d_out;
  for (Eigen::Index b = 0; b < d_out.rows(); ++b) {
    const AugDraw& d = ctx.draws[static_cast<std::size_t>(b)];
    Eigen::VectorXd row = dx.row(b);
    ImgView g(row.data(), static_cast<Eigen::Index>(s.h) * s.w, s.c);
    if (side > 0) cutout(g, s, d.cut_ci, d.cut_cj, side);
    if (trans > 0) translate(g, s, -d.shift_i, -d.shift_j);
    if (p.contrast_range > 0) {
      const double gm = g.mean();
      g = (d.contrast * g.array() + (1.0 - d.contrast) * gm).matrix();
    }
    if (p.saturation_range > 0) {
      const Eigen::VectorXd mean = g.rowwise().mean();
      g = d.saturation * g + (1.0 - d.saturation) * mean *
                                 Eigen::RowVectorXd::Ones(s.c);
    }
    // brightness backward is the identity
    dx.row(b) = row;
  }
  return dx;
}

}  // namespace tg
