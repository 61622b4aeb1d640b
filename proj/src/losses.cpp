#include "ticketgan/losses.hpp"

namespace tg {

LossVariant loss_from_string(const std::string& s) {
  if (s == "hinge") return LossVariant::hinge;
  if (s == "non_saturating") return LossVariant::non_saturating;
  throw std::invalid_argument("unknown loss variant: " + s);
}

std::string loss_to_string(LossVariant v) {
  return v == LossVariant::hinge ? "hinge" : "non_saturating";
}

double discriminator_loss(const Vec& real_scores, const Vec& fake_scores,
                          const LossSpec& spec) {
  if (real_scores.size() == 0 || fake_scores.size() == 0)
    throw std::invalid_argument("discriminator_loss: empty batch");
  double real_term = 0.0, fake_term = 0.0;
  for (Eigen::Index i = 0; i < real_scores.size(); ++i)
    real_term += f_d_loss(-real_scores[i], spec);
  for (Eigen::Index i = 0; i < fake_scores.size(); ++i)
    fake_term += f_d_loss(fake_scores[i], spec);
  return real_term / static_cast<double>(real_scores.size()) +
         fake_term / static_cast<double>(fake_scores.size());
}

void discriminator_loss_grad(const Vec& real_scores, const Vec& fake_scores,
                             const LossSpec& spec, Vec& d_real, Vec& d_fake) {
  if (real_scores.size() == 0 || fake_scores.size() == 0)
    throw std::invalid_argument("discriminator_loss: empty batch");
  d_real.resize(real_scores.size());
  d_fake.resize(fake_scores.size());
  const double nr = static_cast<double>(real_scores.size());
  const double nf = static_cast<double>(fake_scores.size());
  for (Eigen::Index i = 0; i < real_scores.size(); ++i)
    d_real[i] = -f_d_grad(-real_scores[i], spec) / nr;
  for (Eigen::Index i = 0; i < fake_scores.size(); ++i)
    d_fake[i] = f_d_grad(fake_scores[i], spec) / nf;
}

double generator_loss(const Vec& fake_scores, const LossSpec& spec) {
  if (fake_scores.size() == 0)
    throw std::invalid_argument("generator_loss: empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < fake_scores.size(); ++i)
    total += f_g_loss(-fake_scores[i], spec);
  return total / static_cast<double>(fake_scores.size());
}

Vec generator_loss_grad(const Vec& fake_scores, const LossSpec& spec) {
  if (fake_scores.size() == 0)
    throw std::invalid_argument("generator_loss: empty batch");
  Vec g(fake_scores.size());
  const double n = static_cast<double>(fake_scores.size());
  for (Eigen::Index i = 0; i < fake_scores.size(); ++i)
    g[i] = -f_g_grad(-fake_scores[i], spec) / n;
  return g;
}

}  // namespace tg
