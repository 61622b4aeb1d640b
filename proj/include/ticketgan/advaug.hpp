#pragma once

#include <functional>
#include <utility>

#include "ticketgan/losses.hpp"
#include "ticketgan/models.hpp"

namespace tg {

// PGD perturbation settings and feature split points.
struct AdvConfig {
  int steps = 1;            // n; 0 degrades to vanilla training
  double step_size = 0.01;  // alpha
  double epsilon = 0.01;    // linf radius; defaults to n * alpha
  double lambda1 = 1.0;     // generator adversarial weight
  double lambda2 = 1.0;     // discriminator adversarial weight
  int g_split = 1;
  int d_split = -1;  // -1 = before last parameterized layer
  bool perturb_generator = true;
  bool perturb_real = true;
  bool perturb_fake = true;

  // any of these degrades to vanilla training
  bool active() const {
    return steps > 0 && step_size > 0.0 && (lambda1 > 0.0 || lambda2 > 0.0);
  }
  void validate() const;
};

enum class PgdDirection { ascend, descend };

// objective(perturbed_features) -> (value, gradient wrt perturbed features)
using PgdObjective = std::function<std::pair<double, Mat>(const Mat&)>;

// delta_0 = 0; delta_{k+1} = clip_eps(delta_k +/- alpha * sign(grad));
// returns delta_n, to be treated as a constant by the outer update.
Mat pgd_feature_perturb(const Mat& features, const PgdObjective& objective,
                        const AdvConfig& cfg, PgdDirection direction);

// mean f_G(-D(G2(G1(z) + delta))) with delta chosen by PGD ascent
double adv_generator_loss(Network& g, Network& d, const Mat& z,
                          const AdvConfig& cfg, const LossSpec& spec);

// perturbed real term + perturbed fake term, each delta chosen
// adversarially against the discriminator objective
double adv_discriminator_loss(Network& d, const Mat& real_batch,
                              const Mat& fake_batch, const AdvConfig& cfg,
                              const LossSpec& spec);

}  // namespace tg
