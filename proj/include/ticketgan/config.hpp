#pragma once

#include <string>

#include "ticketgan/advaug.hpp"
#include "ticketgan/data.hpp"
#include "ticketgan/dataaug.hpp"
#include "ticketgan/models.hpp"
#include "ticketgan/sparsity.hpp"
#include "ticketgan/trainer.hpp"

namespace tg {

// Flat `key = value` experiment configuration with `#` comments.
// Unknown keys and constraint violations are rejected with the key and
// line number in the error message.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  ModelSpec model;        // model.arch, model.latent_dim, ...
  TrainConfig train;      // train.lr_g, train.batch_size, ...
  PruneConfig prune;      // prune.rho = 0.2, prune.rounds, ...
  AdvConfig advaug;       // advaug.steps = 1, advaug.step_size = 0.01, ...
  AugPolicy aug;          // aug.translation, aug.cutout, ...

  // dataset
  std::string data_source = "ring";  // ring | synthetic_images | folder
  std::int64_t data_n = 10000;
  double data_fraction = 1.0;
  std::string data_manifest;         // optional path, reused by both stages
  std::string data_folder;
  int image_size = 32;
  int ring_modes = 8;
  double ring_radius = 2.0;
  double ring_std = 0.05;

  // metrics
  std::string metrics_extractor = "identity";  // identity|random_conv
  int metrics_eval_samples = 2000;
  std::string metrics_reference = "train";     // train | val
  std::int64_t metrics_interval = 100;
  double ring_quality_radius = 0.25;

  std::int64_t checkpoint_interval = 0;  // 0 = only final

  // canonical rendering used for the checkpoint config hash
  std::string canonical_text() const;
  std::uint64_t hash() const;

  // whether the explicit keys include advaug.epsilon (else eps = n*alpha)
  bool epsilon_explicit = false;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// applies one `key=value` override on top of a parsed config
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

}  // namespace tg
