#include "ticketgan/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace tg {

namespace fs = std::filesystem;

std::string MetricsRow::csv_line() const {
  std::ostringstream os;
  os.precision(10);
  os << iteration << ',' << fid << ',' << is_mean << ',' << is_std << ','
     << d_acc_train << ',' << d_acc_val << ',' << d_acc_real << ','
     << modes_covered << ',' << hq_fraction << ',' << sparsity_g << ','
     << sparsity_d;
  return os.str();
}

std::unique_ptr<DataSource> make_data_source(const ExperimentConfig& cfg) {
  if (cfg.data_source == "ring") {
    SyntheticSpec spec;
    spec.modes = cfg.ring_modes;
    spec.radius = cfg.ring_radius;
    spec.std_dev = cfg.ring_std;
    spec.count = cfg.data_n;
    spec.seed = splitmix64(cfg.seed ^ 0xda7a);
    return make_ring_source(spec);
  }
  if (cfg.data_source == "synthetic_images")
    return make_synthetic_image_source(cfg.data_n, cfg.image_size,
                                       splitmix64(cfg.seed ^ 0xda7a));
  if (cfg.data_source == "folder") return make_folder_source(cfg.data_folder);
  throw std::invalid_argument("unknown data source: " + cfg.data_source);
}

DatasetManifest resolve_manifest(const ExperimentConfig& cfg,
                                 const DataSource& source) {
  if (!cfg.data_manifest.empty()) {
    DatasetManifest m = read_manifest(cfg.data_manifest);
    if (m.total != source.size())
      throw std::runtime_error("manifest N does not match the data source");
    return m;
  }
  return make_subset(source.size(), cfg.data_fraction,
                     splitmix64(cfg.seed ^ 0x5b5e7), source.id());
}

std::vector<std::int64_t> held_out_indices(const DatasetManifest& m,
                                           std::int64_t cap) {
  std::vector<std::int64_t> out;
  std::size_t p = 0;
  for (std::int64_t i = 0; i < m.total && static_cast<std::int64_t>(out.size()) < cap; ++i) {
    while (p < m.indices.size() && m.indices[p] < i) ++p;
    if (p < m.indices.size() && m.indices[p] == i) continue;
    out.push_back(i);
  }
  if (out.empty())
    out.assign(m.indices.begin(),
               m.indices.begin() +
                   std::min<std::size_t>(m.indices.size(),
                                         static_cast<std::size_t>(cap)));
  return out;
}

namespace {

SyntheticSpec ring_spec_of(const ExperimentConfig& cfg) {
  SyntheticSpec spec;
  spec.modes = cfg.ring_modes;
  spec.radius = cfg.ring_radius;
  spec.std_dev = cfg.ring_std;
  spec.count = cfg.data_n;
  spec.seed = splitmix64(cfg.seed ^ 0xda7a);
  return spec;
}

std::vector<std::int64_t> sample_of(const std::vector<std::int64_t>& pool,
                                    std::int64_t cap, std::uint64_t seed) {
  if (static_cast<std::int64_t>(pool.size()) <= cap) return pool;
  Rng rng(seed);
  std::vector<std::int64_t> copy = pool;
  for (std::int64_t i = 0; i < cap; ++i) {
    const auto j = i + rng.uniform_int(static_cast<std::int64_t>(copy.size()) - i);
    std::swap(copy[static_cast<std::size_t>(i)], copy[static_cast<std::size_t>(j)]);
  }
  copy.resize(static_cast<std::size_t>(cap));
  return copy;
}

}  // namespace

MetricsRow evaluate_metrics(const ExperimentConfig& cfg, Network& g, Network& d,
                            const DataSource& source,
                            const DatasetManifest& manifest,
                            std::int64_t iteration, const MaskPair* masks) {
  MetricsRow row;
  row.iteration = iteration;
  const int n_eval = cfg.metrics_eval_samples;

  // deterministic latent draw, fixed across evaluation points
  Rng zrng(splitmix64(cfg.seed ^ 0xe7a1));
  Mat z(n_eval, cfg.model.latent_dim);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = zrng.normal();
  Mat fakes = g.forward(z, false, nullptr);

  const auto train_idx =
      sample_of(manifest.indices, n_eval, splitmix64(cfg.seed ^ 0x7e57));
  Mat train_reals = source.gather(train_idx);
  const auto val_idx = held_out_indices(manifest, n_eval);
  Mat val_reals = source.gather(val_idx);

  // FID
  std::unique_ptr<FeatureExtractor> fx;
  if (cfg.data_source == "ring" || cfg.metrics_extractor == "identity")
    fx = make_identity_extractor(source.shape().size());
  else
    fx = make_random_conv_extractor(source.shape(), 64,
                                    splitmix64(cfg.seed ^ 0xfea7));
  const Mat& ref = cfg.metrics_reference == "val" ? val_reals : train_reals;
  row.fid = frechet_distance(fit_gaussian(fx->extract(ref)),
                             fit_gaussian(fx->extract(fakes)));

  // IS
  Mat probs;
  if (cfg.data_source == "ring") {
    probs = ring_mode_posteriors(fakes, ring_spec_of(cfg));
  } else {
    // pseudo-posteriors: softmax over frozen random features
    Mat f = fx->extract(fakes);
    probs.resize(f.rows(), f.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      Eigen::ArrayXd e = (f.row(i).array() - f.row(i).maxCoeff()).exp();
      probs.row(i) = (e / e.sum()).matrix();
    }
  }
  const int splits = std::max(1, std::min(10, n_eval / 100));
  const InceptionScore is = inception_score(probs, splits);
  row.is_mean = is.mean;
  row.is_std = is.std_dev;

  // discriminator overfitting diagnostic
  const Vec s_train = d.forward(train_reals, false, nullptr).col(0);
  const Vec s_val = d.forward(val_reals, false, nullptr).col(0);
  const Vec s_fake = d.forward(fakes, false, nullptr).col(0);
  const DAccuracyGap gap = d_accuracy_gap(s_train, s_val, s_fake);
  row.d_acc_train = gap.train;
  row.d_acc_val = gap.val;
  row.d_acc_real = gap.real_train;

  if (cfg.data_source == "ring") {
    const RingCoverage rc =
        ring_coverage(fakes, ring_spec_of(cfg), cfg.ring_quality_radius);
    row.modes_covered = rc.modes_covered;
    row.hq_fraction = rc.high_quality_fraction;
  }

  if (masks) {
    row.sparsity_g = sparsity_of(masks->m_g);
    row.sparsity_d = sparsity_of(masks->m_d);
  }
  return row;
}

TrainRunResult run_training(const ExperimentConfig& cfg,
                            const std::string& out_dir,
                            const std::string& ticket_path,
                            const std::string& resume_path,
                            std::int64_t stop_after_iteration) {
  fs::create_directories(out_dir);
  auto source = make_data_source(cfg);
  DatasetManifest manifest = resolve_manifest(cfg, *source);
  write_manifest(out_dir + "/manifest.txt", manifest);

  Network g = build_generator(cfg.model, cfg.seed);
  Network d = build_discriminator(cfg.model, cfg.seed);

  std::optional<MaskPair> masks;
  if (!ticket_path.empty()) {
    Checkpoint ticket = read_checkpoint(ticket_path);
    masks = ticket.masks;
    g.params() = rewind(g.params(), ticket.theta0, masks->m_g);
    d.params() = rewind(d.params(), ticket.phi0, masks->m_d);
  }

  std::optional<Checkpoint> resume;
  if (!resume_path.empty()) {
    resume = read_checkpoint(resume_path);
    if (resume->config_hash != cfg.hash())
      throw checkpoint_error(CheckpointError::config_mismatch,
                             "checkpoint was produced by a different config");
    if (!resume->masks.m_g.empty() || !resume->masks.m_d.empty())
      masks = resume->masks;
    g.params() = resume->theta;
    d.params() = resume->phi;
  }

  TrainConfig tc = cfg.train;
  // training length doubles under a non-identity data augmentation
  const bool doubled = !cfg.aug.identity();
  if (doubled) tc.total_iterations *= 2;

  GanTrainer trainer(g, d, *source, manifest, tc, cfg.advaug, cfg.aug,
                     masks ? &*masks : nullptr);

  const ParamStore theta0 = resume ? resume->theta0 : g.params();
  const ParamStore phi0 = resume ? resume->phi0 : d.params();

  if (resume) {
    trainer.state().iteration = resume->iteration;
    trainer.state().opt_g = resume->opt_g;
    trainer.state().opt_d = resume->opt_d;
    trainer.state().rng.deserialize(resume->rng_state);
  }

  const std::string csv_path = out_dir + "/metrics.csv";
  std::ofstream csv;
  if (resume_path.empty()) {
    csv.open(csv_path);
    csv << kMetricsCsvHeader << "\n";
  } else {
    csv.open(csv_path, std::ios::app);
  }

  const auto save_ckpt = [&](const std::string& path) {
    Checkpoint c;
    c.iteration = trainer.state().iteration;
    c.theta = g.params();
    c.phi = d.params();
    if (masks) c.masks = *masks;
    c.theta0 = theta0;
    c.phi0 = phi0;
    c.opt_g = trainer.state().opt_g;
    c.opt_d = trainer.state().opt_d;
    c.rng_state = trainer.state().rng.serialize();
    c.config_hash = cfg.hash();
    write_checkpoint(path, c);
  };

  TrainRunResult res;
  res.metrics_csv = csv_path;
  MetricsRow row;
  while (trainer.state().iteration < tc.total_iterations) {
    trainer.step();
    const std::int64_t it = trainer.state().iteration;
    if (it % cfg.metrics_interval == 0 || it == tc.total_iterations) {
      row = evaluate_metrics(cfg, g, d, *source, manifest, it,
                             masks ? &*masks : nullptr);
      csv << row.csv_line() << "\n";
      csv.flush();
    }
    if (cfg.checkpoint_interval > 0 && it % cfg.checkpoint_interval == 0)
      save_ckpt(out_dir + "/ckpt_" + std::to_string(it) + ".tkgn");
    if (stop_after_iteration > 0 && it >= stop_after_iteration) break;
  }

  res.iterations_run = trainer.state().iteration;
  res.final_checkpoint = out_dir + "/final.tkgn";
  save_ckpt(res.final_checkpoint);
  if (row.iteration != trainer.state().iteration)
    row = evaluate_metrics(cfg, g, d, *source, manifest,
                           trainer.state().iteration,
                           masks ? &*masks : nullptr);
  res.final_metrics = row;
  return res;
}

TicketRunResult run_find_ticket(const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto source = make_data_source(cfg);
  DatasetManifest manifest = resolve_manifest(cfg, *source);
  write_manifest(out_dir + "/manifest.txt", manifest);

  const std::string rounds_csv = out_dir + "/imp_rounds.csv";
  std::ofstream csv(rounds_csv);
  csv << "round,sparsity_g,sparsity_d,d_loss,g_loss\n";
  csv.precision(10);

  ImpResult imp = run_imp(cfg.model, *source, manifest, cfg.prune, cfg.train,
                          [&](const ImpRoundReport& r) {
                            csv << r.round << ',' << r.sparsity_g << ','
                                << r.sparsity_d << ',' << r.final_d_loss << ','
                                << r.final_g_loss << "\n";
                            csv.flush();
                          });

  TicketRunResult res;
  res.rounds_csv = rounds_csv;
  res.imp = std::move(imp);

  MaskFileHeader h;
  h.rho = cfg.prune.rho;
  h.rounds = static_cast<std::uint32_t>(cfg.prune.rounds);
  h.seed = cfg.seed;
  res.masks_g_path = out_dir + "/masks_g.tkgm";
  res.masks_d_path = out_dir + "/masks_d.tkgm";
  h.player = "g";
  write_mask_file(res.masks_g_path, res.imp.masks.m_g, h);
  h.player = "d";
  write_mask_file(res.masks_d_path, res.imp.masks.m_d, h);

  Checkpoint ticket;
  ticket.iteration = 0;
  ticket.theta = rewind(res.imp.theta0, res.imp.theta0, res.imp.masks.m_g);
  ticket.phi = rewind(res.imp.phi0, res.imp.phi0, res.imp.masks.m_d);
  ticket.masks = res.imp.masks;
  ticket.theta0 = res.imp.theta0;
  ticket.phi0 = res.imp.phi0;
  ticket.rng_state = Rng(cfg.seed).serialize();
  ticket.config_hash = cfg.hash();
  res.ticket_path = out_dir + "/ticket.tkgn";
  write_checkpoint(res.ticket_path, ticket);
  return res;
}

}  // namespace tg
