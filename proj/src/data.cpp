#include "ticketgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tg {

namespace {

std::vector<std::int64_t> sample_without_replacement(std::int64_t n,
                                                     std::int64_t count,
                                                     std::uint64_t seed) {
  std::vector<std::int64_t> all(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (std::int64_t i = 0; i < count; ++i) {
    const std::int64_t j = i + rng.uniform_int(n - i);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
  }
  std::vector<std::int64_t> out(all.begin(), all.begin() + count);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

DatasetManifest make_subset(std::int64_t n, double fraction, std::uint64_t seed,
                            const std::string& source_id) {
  if (n < 1) throw std::invalid_argument("make_subset: N must be >= 1");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("make_subset: fraction must lie in (0,1]");
  const std::int64_t count = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(fraction * static_cast<double>(n))));
  DatasetManifest m;
  m.source_id = source_id;
  m.total = n;
  m.fraction = fraction;
  m.seed = seed;
  m.indices = sample_without_replacement(n, count, seed);
  return m;
}

DatasetManifest make_few_shot(std::int64_t n, std::int64_t count,
                              std::uint64_t seed, const std::string& source_id) {
  if (count < 1 || count > n)
    throw std::invalid_argument("make_few_shot: count must lie in [1, N]");
  DatasetManifest m;
  m.source_id = source_id;
  m.total = n;
  m.fraction = static_cast<double>(count) / static_cast<double>(n);
  m.seed = seed;
  m.indices = sample_without_replacement(n, count, seed);
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "ticketgan-manifest v1; source=" << m.source_id << "; N=" << m.total
     << "; fraction=" << m.fraction << "; seed=" << m.seed << "\n";
  for (std::int64_t i : m.indices) os << i << "\n";
  if (!os) throw std::runtime_error("failed writing manifest: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path);
  std::string header;
  std::getline(is, header);
  DatasetManifest m;
  if (header.rfind("ticketgan-manifest v1;", 0) != 0)
    throw std::runtime_error("bad manifest header: " + path);
  std::istringstream hs(header.substr(header.find(';') + 1));
  std::string field;
  while (std::getline(hs, field, ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    std::string key = field.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    const std::string val = field.substr(eq + 1);
    if (key == "source") m.source_id = val;
    else if (key == "N") m.total = std::stoll(val);
    else if (key == "fraction") m.fraction = std::stod(val);
    else if (key == "seed") m.seed = std::stoull(val);
  }
  std::int64_t idx;
  while (is >> idx) m.indices.push_back(idx);
  for (std::size_t i = 0; i < m.indices.size(); ++i) {
    if (m.indices[i] < 0 || m.indices[i] >= m.total ||
        (i > 0 && m.indices[i] <= m.indices[i - 1]))
      throw std::runtime_error("manifest indices not unique/ascending/in-range");
  }
  return m;
}

Mat ring_mode_centers(const SyntheticSpec& spec) {
  if (spec.modes < 1 || spec.std_dev <= 0)
    throw std::invalid_argument("invalid ring spec");
  Mat c(spec.modes, 2);
  for (int k = 0; k < spec.modes; ++k) {
    const double a = 2.0 * 3.14159265358979323846 * k / spec.modes;
    c(k, 0) = spec.radius * std::cos(a);
    c(k, 1) = spec.radius * std::sin(a);
  }
  return c;
}

Mat sample_ring(const SyntheticSpec& spec) {
  const Mat centers = ring_mode_centers(spec);
  Rng rng(spec.seed);
  Mat out(spec.count, 2);
  for (std::int64_t i = 0; i < spec.count; ++i) {
    const auto k = rng.uniform_int(spec.modes);
    out(i, 0) = centers(k, 0) + spec.std_dev * rng.normal();
    out(i, 1) = centers(k, 1) + spec.std_dev * rng.normal();
  }
  return out;
}

Mat DataSource::gather(const std::vector<std::int64_t>& indices) const {
  Mat out(static_cast<Eigen::Index>(indices.size()), shape().size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= size())
      throw std::out_of_range("sample index out of range: " +
                              std::to_string(indices[i]));
    out.row(static_cast<Eigen::Index>(i)) = get(indices[i]);
  }
  return out;
}

namespace {

class RingSource final : public DataSource {
 public:
  explicit RingSource(const SyntheticSpec& spec)
      : spec_(spec), points_(sample_ring(spec)) {}
  std::int64_t size() const override { return spec_.count; }
  Shape3 shape() const override { return Shape3{2, 1, 1}; }
  Eigen::VectorXd get(std::int64_t i) const override { return points_.row(i); }
  std::string id() const override { return "ring"; }

 private:
  SyntheticSpec spec_;
  Mat points_;
};

// Each image is a handful of soft color blobs on a mid-gray field; all
// geometry and palette come from a per-index hash, so the image set is
// rich enough for a discriminator to memorize but has no global
// structure to generalize from.
class SyntheticImageSource final : public DataSource {
 public:
  SyntheticImageSource(std::int64_t n, int sz, std::uint64_t seed)
      : n_(n), sz_(sz), seed_(seed) {}
  std::int64_t size() const override { return n_; }
  Shape3 shape() const override { return Shape3{3, sz_, sz_}; }
  std::string id() const override { return "synthetic_images"; }

  Eigen::VectorXd get(std::int64_t index) const override {
    Rng rng(splitmix64(seed_ ^ (0x1000003 * static_cast<std::uint64_t>(index) +
                                0xabcdef)));
    Eigen::VectorXd row(3 * sz_ * sz_);
    Eigen::Map<Mat> img(row.data(), sz_ * sz_, 3);
    double bg[3];
    for (auto& v : bg) v = rng.uniform(-0.3, 0.3);
    for (int c = 0; c < 3; ++c) img.col(c).setConstant(bg[c]);
    const int blobs = 3 + static_cast<int>(rng.uniform_int(3));
    for (int b = 0; b < blobs; ++b) {
      const double cx = rng.uniform(0.0, sz_ - 1.0);
      const double cy = rng.uniform(0.0, sz_ - 1.0);
      const double r = rng.uniform(0.1, 0.3) * sz_;
      double col[3];
      for (auto& v : col) v = rng.uniform(-1.0, 1.0);
      for (int i = 0; i < sz_; ++i) {
        for (int j = 0; j < sz_; ++j) {
          const double d2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
          const double wgt = std::exp(-d2 / (2.0 * r * r));
          if (wgt < 1e-4) continue;
          for (int c = 0; c < 3; ++c)
            img(static_cast<Eigen::Index>(i) * sz_ + j, c) += wgt * col[c];
        }
      }
    }
    row = row.array().tanh();
    return row;
  }

 private:
  std::int64_t n_;
  int sz_;
  std::uint64_t seed_;
};

class FolderSource final : public DataSource {
 public:
  explicit FolderSource(const std::string& dir) : dir_(dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
      throw std::runtime_error("not a directory: " + dir);
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".ppm")
        files_.push_back(e.path().string());
    std::sort(files_.begin(), files_.end());
    if (files_.empty()) throw std::runtime_error("no .ppm files in " + dir);
    load(0, shape_, nullptr);
  }

  std::int64_t size() const override {
    return static_cast<std::int64_t>(files_.size());
  }
  Shape3 shape() const override { return shape_; }
  std::string id() const override { return "folder:" + dir_; }

  Eigen::VectorXd get(std::int64_t i) const override {
    Shape3 s;
    Eigen::VectorXd row;
    load(i, s, &row);
    if (!(s == shape_))
      throw std::runtime_error("image size mismatch in folder " + dir_);
    return row;
  }

 private:
  void load(std::int64_t i, Shape3& s, Eigen::VectorXd* row) const {
    std::ifstream is(files_[static_cast<std::size_t>(i)], std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    is >> magic >> w >> h >> maxv;
    if (!is || magic != "P6" || maxv != 255)
      throw std::runtime_error("unsupported PPM file: " +
                               files_[static_cast<std::size_t>(i)]);
    is.get();  // single whitespace after header
    s = Shape3{3, h, w};
    if (!row) return;
    std::vector<unsigned char> buf(static_cast<std::size_t>(3) * w * h);
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (!is) throw std::runtime_error("truncated PPM file");
    row->resize(3 * h * w);
    Eigen::Map<Mat> img(row->data(), static_cast<Eigen::Index>(h) * w, 3);
    for (int p = 0; p < h * w; ++p)
      for (int c = 0; c < 3; ++c)
        img(p, c) = buf[static_cast<std::size_t>(p) * 3 + c] / 127.5 - 1.0;
  }

  std::string dir_;
  std::vector<std::string> files_;
  Shape3 shape_;
};

}  // namespace

std::unique_ptr<DataSource> make_ring_source(const SyntheticSpec& spec) {
  return std::make_unique<RingSource>(spec);
}

std::unique_ptr<DataSource> make_synthetic_image_source(std::int64_t n,
                                                        int image_size,
                                                        std::uint64_t seed) {
  return std::make_unique<SyntheticImageSource>(n, image_size, seed);
}

std::unique_ptr<DataSource> make_folder_source(const std::string& dir) {
  return std::make_unique<FolderSource>(dir);
}

}  // namespace tg
