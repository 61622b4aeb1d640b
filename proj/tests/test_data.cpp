#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ticketgan/data.hpp"

using namespace tg;
namespace fs = std::filesystem;

TEST_CASE("subset size is max(1, floor(f*N)) with sorted unique indices") {
  const DatasetManifest m = make_subset(50000, 0.1, 7, "src");
  CHECK(m.indices.size() == 5000);
  CHECK(m.total == 50000);
  CHECK(m.fraction == 0.1);
  for (std::size_t i = 1; i < m.indices.size(); ++i)
    CHECK(m.indices[i - 1] < m.indices[i]);
  CHECK(m.indices.front() >= 0);
  CHECK(m.indices.back() < 50000);

  CHECK(make_subset(10, 0.001, 1).indices.size() == 1);  // never empty
  CHECK(make_subset(10, 1.0, 1).indices.size() == 10);
  CHECK_THROWS(make_subset(10, 0.0, 1));
  CHECK_THROWS(make_subset(10, 1.5, 1));
}

TEST_CASE("subset is seed-deterministic") {
  const DatasetManifest a = make_subset(1000, 0.25, 42);
  const DatasetManifest b = make_subset(1000, 0.25, 42);
  const DatasetManifest c = make_subset(1000, 0.25, 43);
  CHECK(a.indices == b.indices);
  CHECK(a.indices != c.indices);
}

TEST_CASE("few-shot manifest has the exact count") {
  const DatasetManifest m = make_few_shot(5000, 100, 3, "src");
  CHECK(m.indices.size() == 100);
  for (std::size_t i = 1; i < m.indices.size(); ++i)
    CHECK(m.indices[i - 1] < m.indices[i]);
}

TEST_CASE("manifest round trip and header line") {
  DatasetManifest m = make_subset(200, 0.5, 9, "ring-test");
  const std::string path = "manifest_rt.txt";
  write_manifest(path, m);

  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header.rfind("ticketgan-manifest v1; source=ring-test; N=200; "
                     "fraction=0.5", 0) == 0);
  CHECK(header.find("seed=9") != std::string::npos);

  const DatasetManifest back = read_manifest(path);
  CHECK(back.indices == m.indices);
  CHECK(back.total == m.total);
  CHECK(back.source_id == m.source_id);
  CHECK(back.seed == m.seed);
  std::remove(path.c_str());
}

TEST_CASE("manifest read rejects garbage") {
  const std::string path = "manifest_bad.txt";
  {
    std::ofstream f(path);
    f << "not-a-manifest\n1\n2\n";
  }
  CHECK_THROWS(read_manifest(path));
  {
    std::ofstream f(path);
    f << "ticketgan-manifest v1; source=x; N=10; fraction=0.5; seed=1\n"
      << "3\n2\n";  // not ascending
  }
  CHECK_THROWS(read_manifest(path));
  {
    std::ofstream f(path);
    f << "ticketgan-manifest v1; source=x; N=10; fraction=0.5; seed=1\n"
      << "4\n12\n";  // out of range
  }
  CHECK_THROWS(read_manifest(path));
  std::remove(path.c_str());
}

TEST_CASE("ring source is deterministic and near the modes") {
  SyntheticSpec spec;
  spec.modes = 8;
  spec.radius = 2.0;
  spec.std_dev = 0.02;
  spec.count = 500;
  spec.seed = 5;
  auto src = make_ring_source(spec);
  CHECK(src->size() == 500);
  CHECK(src->shape().size() == 2);

  const Mat centers = ring_mode_centers(spec);
  CHECK(centers.rows() == 8);
  for (std::int64_t i = 0; i < 100; ++i) {
    const Vec x = src->get(i);
    CHECK(x == src->get(i));  // random access is pure
    double best = 1e9;
    for (int k = 0; k < 8; ++k)
      best = std::min(best, (x.transpose() - centers.row(k)).norm());
    CHECK(best < 0.02 * 6);  // within 6 sigma of some mode
  }
}

TEST_CASE("ring samples match sample_ring row for row") {
  SyntheticSpec spec;
  spec.count = 64;
  spec.seed = 11;
  auto src = make_ring_source(spec);
  const Mat all = sample_ring(spec);
  for (std::int64_t i = 0; i < spec.count; ++i)
    CHECK((src->get(i).transpose() - all.row(i)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("synthetic images are pure in (seed, index) and bounded") {
  auto a = make_synthetic_image_source(1000000, 16, 3);  // huge N is fine
  auto b = make_synthetic_image_source(1000000, 16, 3);
  auto c = make_synthetic_image_source(1000000, 16, 4);
  CHECK(a->shape() == Shape3{3, 16, 16});
  const Vec x = a->get(999999);
  CHECK(x == b->get(999999));
  CHECK(x != c->get(999999));
  CHECK(x.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(x.cwiseAbs().maxCoeff() > 0.0);  // not blank
}

TEST_CASE("gather stacks rows in index order") {
  SyntheticSpec spec;
  spec.count = 32;
  auto src = make_ring_source(spec);
  const Mat g = src->gather({3, 7, 7, 0});
  CHECK(g.rows() == 4);
  CHECK(g.row(0) == src->get(3).transpose());
  CHECK(g.row(1) == src->get(7).transpose());
  CHECK(g.row(2) == g.row(1));
  CHECK(g.row(3) == src->get(0).transpose());
  CHECK_THROWS(src->gather({40}));
}

TEST_CASE("folder source reads P6 ppm files in sorted name order") {
  const fs::path dir = fs::temp_directory_path() / "tg_ppm_test";
  fs::create_directories(dir);
  const auto write_ppm = [&](const std::string& name, unsigned char v) {
    std::ofstream f(dir / name, std::ios::binary);
    f << "P6\n2 2\n255\n";
    for (int i = 0; i < 12; ++i) f.put(static_cast<char>(v));
  };
  write_ppm("b.ppm", 255);
  write_ppm("a.ppm", 0);
  auto src = make_folder_source(dir.string());
  CHECK(src->size() == 2);
  CHECK(src->shape() == Shape3{3, 2, 2});
  CHECK(src->get(0).maxCoeff() == doctest::Approx(-1.0));  // a.ppm first
  CHECK(src->get(1).minCoeff() == doctest::Approx(1.0));
  fs::remove_all(dir);
}
