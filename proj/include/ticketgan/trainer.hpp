#pragma once

#include <optional>

#include "ticketgan/advaug.hpp"
#include "ticketgan/data.hpp"
#include "ticketgan/dataaug.hpp"
#include "ticketgan/losses.hpp"
#include "ticketgan/models.hpp"
#include "ticketgan/sparsity.hpp"

namespace tg {

struct TrainConfig {
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  int batch_size = 64;
  std::int64_t total_iterations = 1000;  // T
  int d_steps_per_g = 1;
  double beta1 = 0.0;
  double beta2 = 0.9;
  std::uint64_t seed = 0;
  int latent_dim = 8;
  LossSpec loss;

  void validate() const;
};

struct AdamState {
  GradStore m, v;
  std::int64_t t = 0;
};

struct TrainState {
  std::int64_t iteration = 0;
  Rng rng;
  AdamState opt_g, opt_d;
};

// one Adam update; parameters with zero gradient (e.g. norm-role
// vectors) are left untouched
void adam_update(ParamStore& params, const GradStore& grads, AdamState& opt,
                 double lr, double beta1, double beta2);

struct StepLosses {
  double d_loss = 0.0;       // clean L_D of the last D step
  double g_loss = 0.0;       // clean L_G
  double d_adv_loss = 0.0;   // adversarial L_D term (0 when inactive)
  double g_adv_loss = 0.0;
};

// iterations per epoch under "one iteration consumes d_steps * batch
// real samples" accounting
std::int64_t iterations_per_epoch(std::size_t manifest_size,
                                  const TrainConfig& cfg);

// One training iteration: d_steps_per_g discriminator updates followed
// by one generator update, with optional masks, feature-level
// adversarial augmentation, and data-level augmentation. The vanilla
// step is the degenerate configuration (inactive AdvConfig, identity
// policy).
class GanTrainer {
 public:
  GanTrainer(Network& g, Network& d, const DataSource& source,
             const DatasetManifest& manifest, const TrainConfig& cfg,
             const AdvConfig& adv = {}, const AugPolicy& aug = {},
             const MaskPair* masks = nullptr);

  StepLosses step();

  TrainState& state() { return state_; }
  const TrainState& state() const { return state_; }
  Network& generator() { return *g_; }
  Network& discriminator() { return *d_; }
  const TrainConfig& config() const { return cfg_; }

  // z ~ N(0, I) batch from the training stream
  Mat sample_latents(int n);
  // samples from G without touching the training stream
  Mat generate(int n, std::uint64_t eval_seed);

 private:
  Mat next_real_batch();
  void d_update();
  void g_update();

  Network* g_;
  Network* d_;
  const DataSource* source_;
  const DatasetManifest* manifest_;
  TrainConfig cfg_;
  AdvConfig adv_;
  AugPolicy aug_;
  const MaskPair* masks_;
  TrainState state_;
  int resolved_d_split_;
  StepLosses last_;
};

}  // namespace tg
