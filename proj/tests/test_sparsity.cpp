#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ticketgan/sparsity.hpp"

using namespace tg;

namespace {

ParamStore random_store(Rng& rng, int arrays, int max_elems) {
  ParamStore s;
  for (int a = 0; a < arrays; ++a) {
    const int r = 1 + static_cast<int>(rng.uniform_int(max_elems));
    const int c = 1 + static_cast<int>(rng.uniform_int(8));
    Mat& w = s.add("w" + std::to_string(a), r, c, ParamRole::weight);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.normal();
  }
  s.add("b", 3, 1, ParamRole::bias).setOnes();  // never pruned
  return s;
}

// independent full-sort reference for the global magnitude cut
MaskHalf oracle_prune(const ParamStore& store, const MaskHalf& mask,
                      double rho) {
  struct Entry {
    double mag;
    int name_idx;
    Eigen::Index flat;
  };
  std::vector<Entry> pool;
  const auto names = store.prunable_names();
  for (std::size_t ni = 0; ni < names.size(); ++ni) {
    const Mat& w = store.at(names[ni]);
    const Mat& m = mask.at(names[ni]);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (m(i) != 0.0) pool.push_back({std::abs(w(i)), static_cast<int>(ni), i});
  }
  std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.mag, a.name_idx, a.flat) <
           std::tie(b.mag, b.name_idx, b.flat);
  });
  const auto cut = static_cast<std::size_t>(rho * static_cast<double>(pool.size()));
  MaskHalf out = mask;
  for (std::size_t i = 0; i < cut; ++i)
    out.at(names[static_cast<std::size_t>(pool[i].name_idx)])(pool[i].flat) = 0.0;
  return out;
}

std::int64_t zeros_in(const MaskHalf& m) {
  std::int64_t z = 0;
  for (const auto& [k, v] : m) z += v.size() - static_cast<std::int64_t>(v.array().sum());
  return z;
}

}  // namespace

TEST_CASE("global prune matches the full-sort oracle") {
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    ParamStore s = random_store(rng, 1 + static_cast<int>(rng.uniform_int(4)), 60);
    MaskHalf mask = ones_mask(s);
    const double rho = 0.05 + 0.5 * rng.uniform();
    // two rounds so the oracle also covers pruning under an existing mask
    for (int round = 0; round < 2; ++round) {
      const MaskHalf expect = oracle_prune(s, mask, rho);
      const MaskHalf got = global_magnitude_prune(s, mask, rho);
      for (const auto& [k, v] : expect)
        CHECK((got.at(k) - v).cwiseAbs().maxCoeff() == 0.0);
      mask = got;
    }
  }
}

TEST_CASE("cumulative cuts hit 1-(1-rho)^k within one element") {
  Rng rng(7);
  ParamStore s = random_store(rng, 3, 80);
  MaskHalf mask = ones_mask(s);
  const auto total = s.count_params(true);
  for (int k = 1; k <= 9; ++k) {
    const double expect = target_sparsity(0.2, k);
    mask = one_shot_prune(s, mask, expect);
    CHECK(std::abs(sparsity_of(mask) - expect) <=
          1.0 / static_cast<double>(total) + 1e-12);
  }
  CHECK(target_sparsity(0.2, 2) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(target_sparsity(0.2, 9) == doctest::Approx(0.865782272).epsilon(1e-9));
}

TEST_CASE("a single global prune cuts floor(rho * pool) entries") {
  Rng rng(71);
  ParamStore s = random_store(rng, 2, 40);
  const auto pool = s.count_params(true);
  const MaskHalf m = global_magnitude_prune(s, ones_mask(s), 0.2);
  CHECK(zeros_in(m) == static_cast<std::int64_t>(
                           0.2 * static_cast<double>(pool)));
}

TEST_CASE("pruned entries never come back") {
  Rng rng(8);
  ParamStore s = random_store(rng, 2, 50);
  MaskHalf mask = ones_mask(s);
  for (int round = 0; round < 6; ++round) {
    const MaskHalf next = global_magnitude_prune(s, mask, 0.3);
    for (const auto& [k, v] : mask)
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) == 0.0) CHECK(next.at(k)(i) == 0.0);
    mask = next;
  }
}

TEST_CASE("rho outside (0,1) is rejected; rho=tiny prunes nothing extra") {
  Rng rng(9);
  ParamStore s = random_store(rng, 1, 20);
  MaskHalf mask = ones_mask(s);
  CHECK_THROWS(global_magnitude_prune(s, mask, 0.0));
  CHECK_THROWS(global_magnitude_prune(s, mask, 1.0));
  // floor() semantics: rho smaller than 1/|pool| is a no-op
  const MaskHalf m2 = global_magnitude_prune(
      s, mask, 0.5 / static_cast<double>(s.count_params(true)));
  CHECK(zeros_in(m2) == 0);
}

TEST_CASE("one-shot and random prune reach the target") {
  Rng rng(10);
  ParamStore s = random_store(rng, 2, 60);
  const auto total = s.count_params(true);
  for (double target : {0.36, 0.67, 0.9}) {
    const MaskHalf a = one_shot_prune(s, ones_mask(s), target);
    CHECK(std::abs(sparsity_of(a) - target) <= 1.0 / static_cast<double>(total));
    const MaskHalf b = random_prune(s, ones_mask(s), target, 123);
    CHECK(std::abs(sparsity_of(b) - target) <= 1.0 / static_cast<double>(total));
    CHECK(zeros_in(a) == zeros_in(b));
  }
  CHECK_THROWS(one_shot_prune(s, one_shot_prune(s, ones_mask(s), 0.5), 0.3));
}

TEST_CASE("random prune is seed-deterministic and usually differs from magnitude") {
  Rng rng(11);
  ParamStore s = random_store(rng, 2, 60);
  const MaskHalf r1 = random_prune(s, ones_mask(s), 0.5, 42);
  const MaskHalf r2 = random_prune(s, ones_mask(s), 0.5, 42);
  for (const auto& [k, v] : r1) CHECK((r2.at(k) - v).cwiseAbs().maxCoeff() == 0.0);
  const MaskHalf m = one_shot_prune(s, ones_mask(s), 0.5);
  bool differs = false;
  for (const auto& [k, v] : r1)
    if ((m.at(k) - v).cwiseAbs().maxCoeff() != 0.0) differs = true;
  CHECK(differs);
}

TEST_CASE("rewind restores the init and keeps masked entries at zero") {
  Rng rng(12);
  ParamStore init = random_store(rng, 2, 40);
  ParamStore drifted = init;
  for (const auto& n : drifted.names()) drifted.at(n).array() += 0.37;
  const MaskHalf mask = one_shot_prune(init, ones_mask(init), 0.4);

  const ParamStore back = rewind(drifted, init, mask);
  for (const auto& n : back.names()) {
    if (!back.prunable(n)) {
      CHECK(back.at(n) == init.at(n));
      continue;
    }
    const Mat& m = mask.at(n);
    for (Eigen::Index i = 0; i < m.size(); ++i)
      CHECK(back.at(n)(i) == (m(i) == 0.0 ? 0.0 : init.at(n)(i)));
  }
  // idempotent
  const ParamStore again = rewind(back, init, mask);
  for (const auto& n : back.names()) CHECK(again.at(n) == back.at(n));
}

TEST_CASE("mask validation catches shape and value errors") {
  Rng rng(13);
  ParamStore s = random_store(rng, 1, 10);
  MaskHalf ok = ones_mask(s);
  validate_mask(s, ok);
  MaskHalf bad = ok;
  bad.begin()->second(0) = 0.5;
  CHECK_THROWS(validate_mask(s, bad));
  MaskHalf wrong_shape = ok;
  wrong_shape.begin()->second.resize(1, 1);
  CHECK_THROWS(validate_mask(s, wrong_shape));
}

TEST_CASE("mask file round trip") {
  Rng rng(14);
  ParamStore s = random_store(rng, 3, 40);
  const MaskHalf mask = one_shot_prune(s, ones_mask(s), 0.36);
  MaskFileHeader h;
  h.rho = 0.2;
  h.rounds = 2;
  h.seed = 99;
  h.player = "g";

  const std::string path = "mask_roundtrip.tkgm";
  write_mask_file(path, mask, h);
  MaskFileHeader h2;
  const MaskHalf back = read_mask_file(path, &h2);
  CHECK(h2.rho == h.rho);
  CHECK(h2.rounds == h.rounds);
  CHECK(h2.seed == h.seed);
  CHECK(h2.player == h.player);
  for (const auto& [k, v] : mask)
    CHECK((back.at(k) - v).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("mask file rejects corrupt magic") {
  Rng rng(15);
  ParamStore s = random_store(rng, 1, 10);
  const std::string path = "mask_badmagic.tkgm";
  write_mask_file(path, ones_mask(s), {});
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  CHECK_THROWS(read_mask_file(path, nullptr));
  std::remove(path.c_str());
}
