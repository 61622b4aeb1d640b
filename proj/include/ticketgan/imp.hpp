#pragma once

#include <functional>

#include "ticketgan/trainer.hpp"

namespace tg {

struct ImpRoundReport {
  int round = 0;
  double sparsity_g = 0.0;
  double sparsity_d = 0.0;
  double final_d_loss = 0.0;
  double final_g_loss = 0.0;
};

struct ImpResult {
  MaskPair masks;
  ParamStore theta0;  // generator init snapshot
  ParamStore phi0;    // discriminator init snapshot
  std::vector<ImpRoundReport> rounds;
};

// Iterative magnitude pruning: R rounds of (train t epochs from the
// rewound masked init, prune rho of remaining weights per player,
// rewind). Deterministic given cfg seeds. Throws on non-finite losses,
// carrying the failing round index in the message.
ImpResult run_imp(const ModelSpec& model, const DataSource& source,
                  const DatasetManifest& manifest, const PruneConfig& prune_cfg,
                  const TrainConfig& train_cfg,
                  const std::function<void(const ImpRoundReport&)>& on_round =
                      nullptr);

}  // namespace tg
