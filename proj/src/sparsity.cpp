#include "ticketgan/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace tg {

namespace {

constexpr char kMaskMagic[4] = {'T', 'K', 'G', 'M'};

struct Entry {
  double absw;
  std::size_t name_idx;
  Eigen::Index flat_idx;
};

// ordered prunable names shared by store and mask
std::vector<std::string> mask_names(const ParamStore& store,
                                    const MaskHalf& mask) {
  std::vector<std::string> names = store.prunable_names();
  if (names.size() != mask.size())
    throw std::invalid_argument("mask keys do not match prunable parameters");
  for (const auto& n : names)
    if (!mask.count(n))
      throw std::invalid_argument("mask missing entry for " + n);
  return names;
}

void zero_entries(MaskHalf& mask, const std::vector<std::string>& names,
                  const std::vector<Entry>& chosen, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const Entry& e = chosen[i];
    mask.at(names[e.name_idx]).data()[e.flat_idx] = 0.0;
  }
}

}  // namespace

MaskHalf ones_mask(const ParamStore& store) {
  MaskHalf m;
  for (const auto& n : store.prunable_names()) {
    const Mat& w = store.at(n);
    m[n] = Mat::Ones(w.rows(), w.cols());
  }
  return m;
}

double sparsity_of(const MaskHalf& mask) {
  std::int64_t zeros = 0, total = 0;
  for (const auto& [name, m] : mask) {
    total += m.size();
    zeros += (m.array() == 0.0).count();
  }
  return total == 0 ? 0.0 : static_cast<double>(zeros) / static_cast<double>(total);
}

void validate_mask(const ParamStore& store, const MaskHalf& mask) {
  for (const auto& n : mask_names(store, mask)) {
    const Mat& w = store.at(n);
    const Mat& m = mask.at(n);
    if (m.rows() != w.rows() || m.cols() != w.cols())
      throw std::invalid_argument("mask shape mismatch for " + n);
    if (!((m.array() == 0.0) || (m.array() == 1.0)).all())
      throw std::invalid_argument("mask entries must be exactly 0 or 1: " + n);
  }
}

void apply_mask(ParamStore& store, const MaskHalf& mask) {
  for (const auto& n : mask_names(store, mask)) {
    Mat& w = store.at(n);
    const Mat& m = mask.at(n);
    if (m.rows() != w.rows() || m.cols() != w.cols())
      throw std::invalid_argument("mask shape mismatch for " + n);
    w.array() *= m.array();
  }
}

MaskHalf global_magnitude_prune(const ParamStore& store, const MaskHalf& mask,
                                double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("pruning ratio must lie in (0,1)");
  const auto names = mask_names(store, mask);
  std::vector<Entry> pool;
  for (std::size_t ni = 0; ni < names.size(); ++ni) {
    const Mat& w = store.at(names[ni]);
    const Mat& m = mask.at(names[ni]);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (m.data()[i] != 0.0)
        pool.push_back({std::abs(w.data()[i]), ni, i});
  }
  if (pool.empty())
    throw std::invalid_argument("all prunable entries are already pruned");
  const std::size_t k =
      static_cast<std::size_t>(std::floor(rho * static_cast<double>(pool.size())));
  std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.absw, a.name_idx, a.flat_idx) <
           std::tie(b.absw, b.name_idx, b.flat_idx);
  });
  MaskHalf out = mask;
  zero_entries(out, names, pool, std::min(k, pool.size()));
  return out;
}

MaskHalf one_shot_prune(const ParamStore& store, const MaskHalf& mask,
                        double target) {
  const auto names = mask_names(store, mask);
  std::int64_t total = 0, zeros = 0;
  std::vector<Entry> pool;
  for (std::size_t ni = 0; ni < names.size(); ++ni) {
    const Mat& w = store.at(names[ni]);
    const Mat& m = mask.at(names[ni]);
    total += w.size();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (m.data()[i] != 0.0)
        pool.push_back({std::abs(w.data()[i]), ni, i});
      else
        ++zeros;
    }
  }
  const double current = static_cast<double>(zeros) / static_cast<double>(total);
  if (target < current || target >= 1.0)
    throw std::invalid_argument("target sparsity below current level");
  const std::int64_t want_zero =
      static_cast<std::int64_t>(std::floor(target * static_cast<double>(total)));
  const std::int64_t k = std::max<std::int64_t>(0, want_zero - zeros);
  std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.absw, a.name_idx, a.flat_idx) <
           std::tie(b.absw, b.name_idx, b.flat_idx);
  });
  MaskHalf out = mask;
  zero_entries(out, names, pool, static_cast<std::size_t>(k));
  return out;
}

MaskHalf random_prune(const ParamStore& store, const MaskHalf& mask,
                      double target, std::uint64_t seed) {
  const auto names = mask_names(store, mask);
  std::int64_t total = 0, zeros = 0;
  std::vector<Entry> pool;
  for (std::size_t ni = 0; ni < names.size(); ++ni) {
    const Mat& w = store.at(names[ni]);
    const Mat& m = mask.at(names[ni]);
    total += w.size();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (m.data()[i] != 0.0)
        pool.push_back({0.0, ni, i});
      else
        ++zeros;
    }
  }
  const double current = static_cast<double>(zeros) / static_cast<double>(total);
  if (target < current || target >= 1.0)
    throw std::invalid_argument("target sparsity below current level");
  const std::int64_t want_zero =
      static_cast<std::int64_t>(std::floor(target * static_cast<double>(total)));
  const std::int64_t k = std::max<std::int64_t>(0, want_zero - zeros);
  Rng rng(seed);
  // Fisher-Yates prefix of length k
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t j =
        i + rng.uniform_int(static_cast<std::int64_t>(pool.size()) - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  MaskHalf out = mask;
  zero_entries(out, names, pool, static_cast<std::size_t>(k));
  return out;
}

ParamStore rewind(const ParamStore& store, const ParamStore& init_snapshot,
                  const MaskHalf& mask) {
  if (!store.same_layout(init_snapshot))
    throw std::invalid_argument("rewind: snapshot layout mismatch");
  ParamStore out = init_snapshot;
  apply_mask(out, mask);
  return out;
}

double target_sparsity(double rho, int k) {
  if (!(rho > 0.0 && rho < 1.0) || k < 0)
    throw std::invalid_argument("target_sparsity: invalid arguments");
  return 1.0 - std::pow(1.0 - rho, k);
}

// --------------------------- mask file io ---------------------------

namespace {

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("mask file truncated");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = get<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("mask file truncated");
  return s;
}

}  // namespace

void write_mask_file(const std::string& path, const MaskHalf& mask,
                     const MaskFileHeader& header) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMaskMagic, 4);
  put<std::uint32_t>(os, header.version);
  put<double>(os, header.rho);
  put<std::uint32_t>(os, header.rounds);
  put<std::uint64_t>(os, header.seed);
  put_string(os, header.player);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(mask.size()));
  for (const auto& [name, m] : mask) {
    put_string(os, name);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
    std::vector<std::uint8_t> bits((static_cast<std::size_t>(m.size()) + 7) / 8, 0);
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (m.data()[i] != 0.0)
        bits[static_cast<std::size_t>(i) / 8] |=
            static_cast<std::uint8_t>(1u << (i % 8));
    os.write(reinterpret_cast<const char*>(bits.data()),
             static_cast<std::streamsize>(bits.size()));
  }
  if (!os) throw std::runtime_error("failed writing mask file: " + path);
}

MaskHalf read_mask_file(const std::string& path, MaskFileHeader* header) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open mask file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMaskMagic, 4) != 0)
    throw std::runtime_error("bad mask file magic: " + path);
  MaskFileHeader h;
  h.version = get<std::uint32_t>(is);
  if (h.version != 1)
    throw std::runtime_error("unsupported mask file version " +
                             std::to_string(h.version));
  h.rho = get<double>(is);
  h.rounds = get<std::uint32_t>(is);
  h.seed = get<std::uint64_t>(is);
  h.player = get_string(is);
  const auto count = get<std::uint32_t>(is);
  MaskHalf mask;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::string name = get_string(is);
    const auto rows = static_cast<Eigen::Index>(get<std::uint64_t>(is));
    const auto cols = static_cast<Eigen::Index>(get<std::uint64_t>(is));
    Mat m(rows, cols);
    std::vector<std::uint8_t> bits((static_cast<std::size_t>(rows * cols) + 7) / 8);
    is.read(reinterpret_cast<char*>(bits.data()),
            static_cast<std::streamsize>(bits.size()));
    if (!is) throw std::runtime_error("mask file truncated: " + path);
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = (bits[static_cast<std::size_t>(i) / 8] >> (i % 8)) & 1u ? 1.0 : 0.0;
    mask[name] = std::move(m);
  }
  if (header) *header = h;
  return mask;
}

}  // namespace tg
