#pragma once

#include <functional>
#include <optional>

#include "ticketgan/checkpoint.hpp"
#include "ticketgan/config.hpp"
#include "ticketgan/imp.hpp"
#include "ticketgan/metrics.hpp"

namespace tg {

inline constexpr const char* kMetricsCsvHeader =
    "iteration,fid,is_mean,is_std,d_acc_train,d_acc_val,d_acc_real,"
    "modes_covered,hq_fraction,sparsity_g,sparsity_d";

struct MetricsRow {
  std::int64_t iteration = 0;
  double fid = 0.0;
  double is_mean = 1.0;
  double is_std = 0.0;
  double d_acc_train = 0.0;
  double d_acc_val = 0.0;
  double d_acc_real = 0.0;
  int modes_covered = 0;
  double hq_fraction = 0.0;
  double sparsity_g = 0.0;
  double sparsity_d = 0.0;

  std::string csv_line() const;
};

std::unique_ptr<DataSource> make_data_source(const ExperimentConfig& cfg);

// reads cfg.data_manifest when set, otherwise draws a fresh subset
DatasetManifest resolve_manifest(const ExperimentConfig& cfg,
                                 const DataSource& source);

// held-out indices (complement of the manifest, capped at `cap`);
// falls back to the manifest itself when nothing is held out
std::vector<std::int64_t> held_out_indices(const DatasetManifest& m,
                                           std::int64_t cap);

// full metric sweep for the current G/D pair
MetricsRow evaluate_metrics(const ExperimentConfig& cfg, Network& g, Network& d,
                            const DataSource& source,
                            const DatasetManifest& manifest,
                            std::int64_t iteration, const MaskPair* masks);

struct TrainRunResult {
  std::int64_t iterations_run = 0;
  std::string final_checkpoint;
  std::string metrics_csv;
  MetricsRow final_metrics;
};

// Orchestrated training run: optional ticket init, periodic metrics CSV
// rows, periodic checkpoints, resume support. Doubles the iteration
// budget when the data-augmentation policy is non-identity.
TrainRunResult run_training(const ExperimentConfig& cfg,
                            const std::string& out_dir,
                            const std::string& ticket_path = "",
                            const std::string& resume_path = "",
                            std::int64_t stop_after_iteration = -1);

struct TicketRunResult {
  std::string ticket_path;
  std::string masks_g_path;
  std::string masks_d_path;
  std::string rounds_csv;
  ImpResult imp;
};

// Alg.-1 driver: IMP rounds, then masks + init snapshots on disk.
TicketRunResult run_find_ticket(const ExperimentConfig& cfg,
                                const std::string& out_dir);

}  // namespace tg
