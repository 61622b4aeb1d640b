#include "ticketgan/advaug.hpp"

#include <cmath>
#include <stdexcept>

namespace tg {

void AdvConfig::validate() const {
  if (steps < 0 || step_size < 0 || lambda1 < 0 || lambda2 < 0)
    throw std::invalid_argument("adversarial config fields must be non-negative");
  if (epsilon <= 0)
    throw std::invalid_argument("epsilon must be positive");
  if (steps > 0 && step_size > 0 && epsilon < step_size)
    throw std::invalid_argument("epsilon must be at least the step size");
}

Mat pgd_feature_perturb(const Mat& features, const PgdObjective& objective,
                        const AdvConfig& cfg, PgdDirection direction) {
  Mat delta = Mat::Zero(features.rows(), features.cols());
  if (cfg.steps == 0 || cfg.step_size == 0.0) return delta;
  const double sgn = direction == PgdDirection::ascend ? 1.0 : -1.0;
  for (int k = 0; k < cfg.steps; ++k) {
    auto [value, grad] = objective(features + delta);
    (void)value;
    if (!grad.allFinite())
      throw std::runtime_error("pgd_feature_perturb: non-finite gradient");
    delta += (sgn * cfg.step_size) * grad.array().sign().matrix();
    delta = delta.cwiseMax(-cfg.epsilon).cwiseMin(cfg.epsilon);
  }
  return delta;
}

namespace {

// value + gradient wrt the split features of the generator loss
// evaluated through G2 and all of D
PgdObjective make_gen_objective(Network& g, Network& d, std::size_t g_boundary,
                                const LossSpec& spec) {
  return [&g, &d, g_boundary, spec](const Mat& hp) {
    Caches gc = g.make_caches();
    Caches dc = d.make_caches();
    Mat images = g.forward_range(g_boundary, g.layer_count(), hp, false, &gc);
    Mat scores = d.forward(images, false, &dc);
    const Vec s = scores.col(0);
    const double value = generator_loss(s, spec);
    GradStore scratch_g = zeros_like(g.params());
    GradStore scratch_d = zeros_like(d.params());
    Mat ds = generator_loss_grad(s, spec);
    Mat dimg = d.backward_range(0, d.layer_count(), ds, scratch_d, dc);
    Mat dh = g.backward_range(g_boundary, g.layer_count(), dimg, scratch_g, gc);
    return std::make_pair(value, dh);
  };
}

// value + gradient of one discriminator loss term through D2 only;
// sign = -1 for the real term (f_D(-D2(h))), +1 for the fake term
PgdObjective make_disc_objective(Network& d, std::size_t d_boundary,
                                 const LossSpec& spec, double score_sign) {
  return [&d, d_boundary, spec, score_sign](const Mat& hp) {
    Caches dc = d.make_caches();
    Mat scores =
        d.forward_range(d_boundary, d.layer_count(), hp, false, &dc);
    const Vec s = scores.col(0);
    const double n = static_cast<double>(s.size());
    double value = 0.0;
    Vec ds(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      value += f_d_loss(score_sign * s[i], spec) / n;
      ds[i] = score_sign * f_d_grad(score_sign * s[i], spec) / n;
    }
    GradStore scratch = zeros_like(d.params());
    Mat dh = d.backward_range(d_boundary, d.layer_count(), ds, scratch, dc);
    return std::make_pair(value, dh);
  };
}

}  // namespace

double adv_generator_loss(Network& g, Network& d, const Mat& z,
                          const AdvConfig& cfg, const LossSpec& spec) {
  cfg.validate();
  const std::size_t b = g.split_boundary(cfg.g_split);
  Mat h = g.forward_range(0, b, z, false, nullptr);
  Mat delta = Mat::Zero(h.rows(), h.cols());
  if (cfg.perturb_generator)
    delta = pgd_feature_perturb(h, make_gen_objective(g, d, b, spec), cfg,
                                PgdDirection::ascend);
  Mat images = g.forward_range(b, g.layer_count(), h + delta, false, nullptr);
  Mat scores = d.forward(images, false, nullptr);
  return generator_loss(scores.col(0), spec);
}

double adv_discriminator_loss(Network& d, const Mat& real_batch,
                              const Mat& fake_batch, const AdvConfig& cfg,
                              const LossSpec& spec) {
  cfg.validate();
  const int split = cfg.d_split > 0
                        ? cfg.d_split
                        : static_cast<int>(d.param_layer_count()) - 1;
  const std::size_t b = d.split_boundary(split);
  Mat hr = d.forward_range(0, b, real_batch, false, nullptr);
  Mat hf = d.forward_range(0, b, fake_batch, false, nullptr);
  Mat dr = Mat::Zero(hr.rows(), hr.cols());
  Mat df = Mat::Zero(hf.rows(), hf.cols());
  // the adversary ascends D's loss (worst case for the discriminator)
  if (cfg.perturb_real)
    dr = pgd_feature_perturb(hr, make_disc_objective(d, b, spec, -1.0), cfg,
                             PgdDirection::ascend);
  if (cfg.perturb_fake)
    df = pgd_feature_perturb(hf, make_disc_objective(d, b, spec, +1.0), cfg,
                             PgdDirection::ascend);
  const Vec sr = d.forward_range(b, d.layer_count(), hr + dr, false, nullptr).col(0);
  const Vec sf = d.forward_range(b, d.layer_count(), hf + df, false, nullptr).col(0);
  return discriminator_loss(sr, sf, spec);
}

}  // namespace tg
