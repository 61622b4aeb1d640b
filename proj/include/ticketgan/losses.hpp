#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tg {

using Vec = Eigen::VectorXd;

enum class LossVariant { hinge, non_saturating };

struct LossSpec {
  LossVariant variant = LossVariant::hinge;
};

LossVariant loss_from_string(const std::string& s);
std::string loss_to_string(LossVariant v);

// log(1 + e^x), overflow-safe
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double f_d_loss(double score, const LossSpec& spec) {
  return spec.variant == LossVariant::hinge ? std::max(0.0, 1.0 + score)
                                            : softplus(score);
}

inline double f_d_grad(double score, const LossSpec& spec) {
  if (spec.variant == LossVariant::hinge) return score > -1.0 ? 1.0 : 0.0;
  return sigmoid(score);
}

inline double f_g_loss(double score, const LossSpec& spec) {
  return spec.variant == LossVariant::hinge ? score : softplus(score);
}

inline double f_g_grad(double score, const LossSpec& spec) {
  return spec.variant == LossVariant::hinge ? 1.0 : sigmoid(score);
}

// L_D = E_x[f_D(-D(x))] + E_z[f_D(D(G(z)))]
double discriminator_loss(const Vec& real_scores, const Vec& fake_scores,
                          const LossSpec& spec);

// gradients of L_D wrt the raw scores
void discriminator_loss_grad(const Vec& real_scores, const Vec& fake_scores,
                             const LossSpec& spec, Vec& d_real, Vec& d_fake);

// L_G = E_z[f_G(-D(G(z)))]
double generator_loss(const Vec& fake_scores, const LossSpec& spec);

// gradient of L_G wrt the fake scores
Vec generator_loss_grad(const Vec& fake_scores, const LossSpec& spec);

}  // namespace tg
