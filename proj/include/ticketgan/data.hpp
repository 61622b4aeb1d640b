#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ticketgan/layers.hpp"
#include "ticketgan/rng.hpp"

namespace tg {

// Seeded index list defining a limited-data subset or few-shot set.
struct DatasetManifest {
  std::string source_id;
  std::int64_t total = 0;           // N
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> indices;  // unique, ascending, in [0, N)
};

DatasetManifest make_subset(std::int64_t n, double fraction, std::uint64_t seed,
                            const std::string& source_id = "unknown");
DatasetManifest make_few_shot(std::int64_t n, std::int64_t count,
                              std::uint64_t seed,
                              const std::string& source_id = "unknown");

void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

// Gaussian ring: K modes equally spaced on a circle.
struct SyntheticSpec {
  int modes = 8;
  double radius = 2.0;
  double std_dev = 0.05;
  std::int64_t count = 10000;
  std::uint64_t seed = 0;
};

// n x 2 point batch, deterministic per seed
Mat sample_ring(const SyntheticSpec& spec);

Mat ring_mode_centers(const SyntheticSpec& spec);

// Random-access dataset of fixed-shape samples in [-1, 1].
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual std::int64_t size() const = 0;
  virtual Shape3 shape() const = 0;
  virtual Eigen::VectorXd get(std::int64_t index) const = 0;
  virtual std::string id() const = 0;

  Mat gather(const std::vector<std::int64_t>& indices) const;
};

// 2-D ring points; index i is the i-th deterministic draw.
std::unique_ptr<DataSource> make_ring_source(const SyntheticSpec& spec);

// Procedural 32x32 RGB images (soft random blobs); sample `index` is a
// pure function of (seed, index), so arbitrary N costs no memory.
std::unique_ptr<DataSource> make_synthetic_image_source(std::int64_t n,
                                                        int image_size,
                                                        std::uint64_t seed);

// Folder of binary PPM (P6) files, sorted by filename, scaled to [-1,1].
std::unique_ptr<DataSource> make_folder_source(const std::string& dir);

}  // namespace tg
