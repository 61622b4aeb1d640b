#include "doctest.h"
#include "ticketgan/imp.hpp"

using namespace tg;

namespace {

struct ImpSetup {
  ModelSpec spec = ModelSpec::defaults(Arch::mlp_gan_2d);
  SyntheticSpec ring;
  std::unique_ptr<DataSource> source;
  DatasetManifest manifest;
  TrainConfig train;
  PruneConfig prune;

  ImpSetup() {
    spec.width = 16;
    ring.count = 256;
    ring.seed = 2;
    source = make_ring_source(ring);
    manifest = make_subset(ring.count, 0.25, 3, source->id());
    train.batch_size = 16;
    train.latent_dim = spec.latent_dim;
    train.seed = 11;
    prune.rounds = 2;
    prune.epochs_per_round = 1;
  }
};

}  // namespace

TEST_CASE("imp reaches the per-round sparsity schedule on both players") {
  ImpSetup s;
  s.prune.rounds = 3;
  const ImpResult r =
      run_imp(s.spec, *s.source, s.manifest, s.prune, s.train);
  REQUIRE(r.rounds.size() == 3);
  const auto tol_g =
      1.0 / static_cast<double>(r.theta0.count_params(true));
  const auto tol_d = 1.0 / static_cast<double>(r.phi0.count_params(true));
  for (int k = 1; k <= 3; ++k) {
    const auto& round = r.rounds[static_cast<std::size_t>(k - 1)];
    CHECK(std::abs(round.sparsity_g - target_sparsity(0.2, k)) <= tol_g + 1e-12);
    CHECK(std::abs(round.sparsity_d - target_sparsity(0.2, k)) <= tol_d + 1e-12);
    CHECK(std::isfinite(round.final_d_loss));
    CHECK(std::isfinite(round.final_g_loss));
  }
  CHECK(std::abs(sparsity_of(r.masks.m_g) - 0.488) < tol_g + 1e-12);
}

TEST_CASE("imp is deterministic") {
  ImpSetup a, b;
  const ImpResult ra = run_imp(a.spec, *a.source, a.manifest, a.prune, a.train);
  const ImpResult rb = run_imp(b.spec, *b.source, b.manifest, b.prune, b.train);
  for (const auto& [k, m] : ra.masks.m_g)
    CHECK((rb.masks.m_g.at(k) - m).cwiseAbs().maxCoeff() == 0.0);
  for (const auto& [k, m] : ra.masks.m_d)
    CHECK((rb.masks.m_d.at(k) - m).cwiseAbs().maxCoeff() == 0.0);
  for (const auto& n : ra.theta0.names())
    CHECK(ra.theta0.at(n) == rb.theta0.at(n));
}

TEST_CASE("round reports arrive in order through the callback") {
  ImpSetup s;
  s.prune.rounds = 2;
  std::vector<int> seen;
  run_imp(s.spec, *s.source, s.manifest, s.prune, s.train,
          [&](const ImpRoundReport& r) { seen.push_back(r.round); });
  CHECK(seen == std::vector<int>{1, 2});
}

TEST_CASE("masks only ever shrink across rounds") {
  ImpSetup s;
  s.prune.rounds = 4;
  MaskHalf prev_g, prev_d;
  run_imp(s.spec, *s.source, s.manifest, s.prune, s.train,
          [&](const ImpRoundReport& r) {
            (void)r;
          });
  // monotonic sparsity is implied by the schedule check; here verify
  // zero-set growth via per-round sparsities
  const ImpResult r = run_imp(s.spec, *s.source, s.manifest, s.prune, s.train);
  for (std::size_t i = 1; i < r.rounds.size(); ++i) {
    CHECK(r.rounds[i].sparsity_g > r.rounds[i - 1].sparsity_g);
    CHECK(r.rounds[i].sparsity_d > r.rounds[i - 1].sparsity_d);
  }
}

TEST_CASE("result is rewound: survivors equal the init, pruned are zero") {
  ImpSetup s;
  const ImpResult r = run_imp(s.spec, *s.source, s.manifest, s.prune, s.train);
  Network g = build_generator(s.spec, s.train.seed);
  // theta0 must be the seed-determined init
  for (const auto& n : g.params().names())
    CHECK(g.params().at(n) == r.theta0.at(n));
  const ParamStore ticket = rewind(r.theta0, r.theta0, r.masks.m_g);
  for (const auto& n : ticket.names()) {
    if (!ticket.prunable(n)) continue;
    const Mat& m = r.masks.m_g.at(n);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (m(i) == 0.0)
        CHECK(ticket.at(n)(i) == 0.0);
      else
        CHECK(ticket.at(n)(i) == r.theta0.at(n)(i));
    }
  }
}

TEST_CASE("zero rounds yields dense masks") {
  ImpSetup s;
  s.prune.rounds = 0;
  const ImpResult r = run_imp(s.spec, *s.source, s.manifest, s.prune, s.train);
  CHECK(sparsity_of(r.masks.m_g) == 0.0);
  CHECK(sparsity_of(r.masks.m_d) == 0.0);
  CHECK(r.rounds.empty());
}
