#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ticketgan/param_store.hpp"
#include "ticketgan/rng.hpp"

namespace tg {

// Binary mask over one player's prunable parameters; entries are 0 or 1.
using MaskHalf = std::map<std::string, Mat>;

struct MaskPair {
  MaskHalf m_g;
  MaskHalf m_d;
};

struct PruneConfig {
  double rho = 0.2;          // fraction of remaining weights pruned per round
  int rounds = 0;            // R
  int epochs_per_round = 10; // t, passes over the manifest per round
};

// all-ones mask over the store's prunable arrays
MaskHalf ones_mask(const ParamStore& store);

// zeros / (zeros + ones)
double sparsity_of(const MaskHalf& mask);

// checks shape match and {0,1} entries
void validate_mask(const ParamStore& store, const MaskHalf& mask);

// element-wise store *= mask over prunable arrays
void apply_mask(ParamStore& store, const MaskHalf& mask);

// Zeroes the floor(rho * |remaining|) smallest-|weight| entries pooled
// globally across the player's prunable arrays. Ties break by ascending
// (parameter name order, flat index). Already-zero mask entries stay 0.
MaskHalf global_magnitude_prune(const ParamStore& store, const MaskHalf& mask,
                                double rho);

// single global magnitude cut down to `target` sparsity
MaskHalf one_shot_prune(const ParamStore& store, const MaskHalf& mask,
                        double target);

// uniformly random cut down to `target` sparsity
MaskHalf random_prune(const ParamStore& store, const MaskHalf& mask,
                      double target, std::uint64_t seed);

// reset every parameter to its init value, then re-apply masks
ParamStore rewind(const ParamStore& store, const ParamStore& init_snapshot,
                  const MaskHalf& mask);

// 1 - (1-rho)^k
double target_sparsity(double rho, int k);

// ---- mask container file (versioned binary, bit-packed payload) ----

struct MaskFileHeader {
  std::uint32_t version = 1;
  double rho = 0.0;
  std::uint32_t rounds = 0;
  std::uint64_t seed = 0;
  std::string player;  // "g" or "d"
};

void write_mask_file(const std::string& path, const MaskHalf& mask,
                     const MaskFileHeader& header);
MaskHalf read_mask_file(const std::string& path, MaskFileHeader* header);

}  // namespace tg
