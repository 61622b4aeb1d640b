// ticketgan: experiment driver.
//
//   ticketgan <subcommand> --config <path> [--override k=v ...] [--out <dir>]
//
// Subcommands: find-ticket, train, eval, subset, plot.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ticketgan/experiment.hpp"
#include "ticketgan/plot.hpp"

namespace {

tg::ExperimentConfig load_cfg(const std::string& path,
                              const std::vector<std::string>& overrides) {
  tg::ExperimentConfig cfg = tg::load_config_file(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must be key=value: " + kv);
    tg::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (const char* env = std::getenv("TICKETGAN_SEED"))
    tg::apply_override(cfg, "seed", env);
  return cfg;
}

int cmd_find_ticket(const tg::ExperimentConfig& cfg, const std::string& out) {
  const tg::TicketRunResult r = tg::run_find_ticket(cfg, out);
  std::cout << "wrote " << r.masks_g_path << "\n"
            << "wrote " << r.masks_d_path << "\n"
            << "wrote " << r.ticket_path << "\n"
            << "wrote " << r.rounds_csv << "\n";
  if (!r.imp.rounds.empty()) {
    const auto& last = r.imp.rounds.back();
    std::cout << "final sparsity: g=" << last.sparsity_g
              << " d=" << last.sparsity_d << "\n";
  }
  return 0;
}

int cmd_train(const tg::ExperimentConfig& cfg, const std::string& out,
              const std::string& ticket, const std::string& resume) {
  const tg::TrainRunResult r = tg::run_training(cfg, out, ticket, resume);
  std::cout << "ran " << r.iterations_run << " iterations\n"
            << "wrote " << r.metrics_csv << "\n"
            << "wrote " << r.final_checkpoint << "\n"
            << "final fid=" << r.final_metrics.fid
            << " is=" << r.final_metrics.is_mean << "\n";
  return 0;
}

int cmd_eval(const tg::ExperimentConfig& cfg, const std::string& out,
             const std::string& ckpt_path) {
  const tg::Checkpoint c = tg::read_checkpoint(ckpt_path);
  if (c.config_hash != cfg.hash())
    throw tg::checkpoint_error(tg::CheckpointError::config_mismatch,
                               "checkpoint was produced by a different config");
  auto source = tg::make_data_source(cfg);
  const tg::DatasetManifest manifest = tg::resolve_manifest(cfg, *source);
  tg::Network g = tg::build_generator(cfg.model, cfg.seed);
  tg::Network d = tg::build_discriminator(cfg.model, cfg.seed);
  g.params() = c.theta;
  d.params() = c.phi;
  const bool masked = !c.masks.m_g.empty() || !c.masks.m_d.empty();
  const tg::MetricsRow row = tg::evaluate_metrics(
      cfg, g, d, *source, manifest, c.iteration, masked ? &c.masks : nullptr);

  std::filesystem::create_directories(out);
  const std::string report = out + "/eval.csv";
  std::ofstream f(report);
  f << tg::kMetricsCsvHeader << "\n" << row.csv_line() << "\n";
  std::cout << "wrote " << report << "\n" << tg::kMetricsCsvHeader << "\n"
            << row.csv_line() << "\n";
  return 0;
}

int cmd_subset(const tg::ExperimentConfig& cfg, const std::string& out) {
  auto source = tg::make_data_source(cfg);
  const tg::DatasetManifest m = tg::make_subset(
      source->size(), cfg.data_fraction, tg::splitmix64(cfg.seed ^ 0x5b5e7),
      source->id());
  std::filesystem::create_directories(out);
  const std::string path = out + "/manifest.txt";
  tg::write_manifest(path, m);
  std::cout << "wrote " << path << " (" << m.indices.size() << " of "
            << m.total << " indices)\n";
  return 0;
}

// one chart per metric family from a metrics.csv (or imp_rounds.csv)
int cmd_plot(const std::string& csv_path, const std::string& out) {
  const tg::CsvTable t = tg::read_csv(csv_path);
  std::filesystem::create_directories(out);

  const auto emit = [&](const std::string& file, const std::string& title,
                        const std::string& xcol,
                        const std::vector<std::string>& ycols) {
    if (!t.has_column(xcol)) return;
    std::vector<tg::Series> series;
    for (const auto& yc : ycols)
      if (t.has_column(yc))
        series.push_back({yc, t.column(xcol), t.column(yc)});
    if (series.empty()) return;
    const std::string path = out + "/" + file;
    tg::write_svg_chart(path, title, xcol, "value", series);
    std::cout << "wrote " << path << "\n";
  };

  emit("fid.svg", "FID", "iteration", {"fid"});
  emit("is.svg", "Inception score", "iteration", {"is_mean"});
  emit("d_acc_gap.svg", "D accuracy (train vs val)", "iteration",
       {"d_acc_train", "d_acc_val", "d_acc_real"});
  emit("coverage.svg", "Mode coverage", "iteration",
       {"modes_covered", "hq_fraction"});
  emit("fid_vs_sparsity.svg", "FID vs sparsity", "sparsity_g", {"fid"});
  emit("imp_rounds.svg", "IMP sparsity per round", "round",
       {"sparsity_g", "sparsity_d"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lottery-ticket GAN experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ticket_path, resume_path, ckpt_path,
      csv_path;
  std::vector<std::string> overrides;

  const auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", config_path, "config file");
    if (need_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--override", overrides, "key=value config overrides");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* find = app.add_subcommand("find-ticket", "run iterative pruning");
  add_common(find, true);
  auto* train = app.add_subcommand("train", "train a (sparse) GAN");
  add_common(train, true);
  train->add_option("--ticket", ticket_path, "ticket checkpoint (masks + init)")
      ->check(CLI::ExistingFile);
  train->add_option("--resume", resume_path, "checkpoint to resume from")
      ->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, true);
  eval->add_option("--checkpoint", ckpt_path, "checkpoint to evaluate")
      ->required()
      ->check(CLI::ExistingFile);
  auto* subset = app.add_subcommand("subset", "write a dataset manifest");
  add_common(subset, true);
  auto* plot = app.add_subcommand("plot", "render a metrics CSV to SVG");
  plot->add_option("--csv", csv_path, "metrics or rounds CSV")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed())
      return cmd_plot(csv_path, out_dir.empty() ? "." : out_dir);

    tg::ExperimentConfig cfg = load_cfg(config_path, overrides);
    const std::string out = out_dir.empty() ? cfg.out_dir : out_dir;
    if (find->parsed()) return cmd_find_ticket(cfg, out);
    if (train->parsed()) return cmd_train(cfg, out, ticket_path, resume_path);
    if (eval->parsed()) return cmd_eval(cfg, out, ckpt_path);
    if (subset->parsed()) return cmd_subset(cfg, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
