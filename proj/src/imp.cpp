#include "ticketgan/imp.hpp"

#include <stdexcept>
#include <string>

namespace tg {

ImpResult run_imp(const ModelSpec& model, const DataSource& source,
                  const DatasetManifest& manifest, const PruneConfig& prune_cfg,
                  const TrainConfig& train_cfg,
                  const std::function<void(const ImpRoundReport&)>& on_round) {
  if (prune_cfg.rounds < 0)
    throw std::invalid_argument("rounds must be non-negative");
  if (prune_cfg.rounds > 0 && !(prune_cfg.rho > 0 && prune_cfg.rho < 1))
    throw std::invalid_argument("pruning ratio must lie in (0,1)");
  if (prune_cfg.epochs_per_round < 1)
    throw std::invalid_argument("epochs_per_round must be positive");

  Network g = build_generator(model, train_cfg.seed);
  Network d = build_discriminator(model, train_cfg.seed);

  ImpResult result;
  result.theta0 = g.params();
  result.phi0 = d.params();
  result.masks.m_g = ones_mask(g.params());
  result.masks.m_d = ones_mask(d.params());

  for (int round = 0; round < prune_cfg.rounds; ++round) {
    // train from the masked initialization
    g.params() = rewind(g.params(), result.theta0, result.masks.m_g);
    d.params() = rewind(d.params(), result.phi0, result.masks.m_d);

    TrainConfig round_cfg = train_cfg;
    round_cfg.seed = splitmix64(train_cfg.seed + 0x9e37 * (round + 1));
    round_cfg.total_iterations =
        iterations_per_epoch(manifest.indices.size(), round_cfg) *
        prune_cfg.epochs_per_round;
    GanTrainer trainer(g, d, source, manifest, round_cfg, AdvConfig{.steps = 0},
                       AugPolicy{}, &result.masks);
    const std::int64_t iters = round_cfg.total_iterations;
    ImpRoundReport rep;
    rep.round = round + 1;
    try {
      for (std::int64_t i = 0; i < iters; ++i) {
        StepLosses l = trainer.step();
        rep.final_d_loss = l.d_loss;
        rep.final_g_loss = l.g_loss;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("IMP round " + std::to_string(round + 1) +
                               " failed: " + e.what());
    }

    // cut to the cumulative 1-(1-rho)^k target rather than re-flooring
    // rho of the pool each round, so floor drift never exceeds one
    // element per player at any round
    const double target = target_sparsity(prune_cfg.rho, round + 1);
    result.masks.m_g = one_shot_prune(g.params(), result.masks.m_g, target);
    result.masks.m_d = one_shot_prune(d.params(), result.masks.m_d, target);

    rep.sparsity_g = sparsity_of(result.masks.m_g);
    rep.sparsity_d = sparsity_of(result.masks.m_d);
    result.rounds.push_back(rep);
    if (on_round) on_round(rep);
  }

  // leave the networks rewound to the winning-ticket initialization
  g.params() = rewind(g.params(), result.theta0, result.masks.m_g);
  d.params() = rewind(d.params(), result.phi0, result.masks.m_d);
  return result;
}

}  // namespace tg
