#include "ticketgan/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace tg {

namespace {

constexpr char kMagic[4] = {'T', 'K', 'G', 'N'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is)
    throw checkpoint_error(CheckpointError::truncated,
                           "checkpoint file truncated");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is)
    throw checkpoint_error(CheckpointError::truncated,
                           "checkpoint file truncated");
  return s;
}

void put_mat(std::ostream& os, const Mat& m) {
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Mat get_mat(std::istream& is) {
  const auto rows = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  const auto cols = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  Mat m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is)
    throw checkpoint_error(CheckpointError::truncated,
                           "checkpoint file truncated");
  return m;
}

void put_store(std::ostream& os, const ParamStore& p) {
  put<std::uint64_t>(os, p.names().size());
  for (const auto& n : p.names()) {
    put_string(os, n);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(p.role(n)));
    put_mat(os, p.at(n));
  }
}

ParamStore get_store(std::istream& is) {
  ParamStore p;
  const auto count = get<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = get_string(is);
    const auto role = static_cast<ParamRole>(get<std::uint8_t>(is));
    Mat m = get_mat(is);
    p.add(name, m.rows(), m.cols(), role) = m;
  }
  return p;
}

void put_grads(std::ostream& os, const GradStore& g) {
  put<std::uint64_t>(os, g.size());
  for (const auto& [name, m] : g) {
    put_string(os, name);
    put_mat(os, m);
  }
}

GradStore get_grads(std::istream& is) {
  GradStore g;
  const auto count = get<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = get_string(is);
    g[name] = get_mat(is);
  }
  return g;
}

void put_mask(std::ostream& os, const MaskHalf& m) {
  put<std::uint64_t>(os, m.size());
  for (const auto& [name, mat] : m) {
    put_string(os, name);
    put_mat(os, mat);
  }
}

MaskHalf get_mask(std::istream& is) {
  MaskHalf m;
  const auto count = get<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = get_string(is);
    m[name] = get_mat(is);
  }
  return m;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, 4);
  put<std::uint32_t>(os, c.version);
  put<std::int64_t>(os, c.iteration);
  put<std::uint64_t>(os, c.config_hash);
  put_store(os, c.theta);
  put_store(os, c.phi);
  put_mask(os, c.masks.m_g);
  put_mask(os, c.masks.m_d);
  put_store(os, c.theta0);
  put_store(os, c.phi0);
  put<std::int64_t>(os, c.opt_g.t);
  put_grads(os, c.opt_g.m);
  put_grads(os, c.opt_g.v);
  put<std::int64_t>(os, c.opt_d.t);
  put_grads(os, c.opt_d.m);
  put_grads(os, c.opt_d.v);
  put_string(os, c.rng_state);
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw checkpoint_error(CheckpointError::bad_magic,
                           "bad checkpoint magic in " + path);
  Checkpoint c;
  c.version = get<std::uint32_t>(is);
  if (c.version != 1)
    throw checkpoint_error(
        CheckpointError::bad_version,
        "checkpoint version " + std::to_string(c.version) +
            " is not supported (expected version 1)");
  c.iteration = get<std::int64_t>(is);
  c.config_hash = get<std::uint64_t>(is);
  c.theta = get_store(is);
  c.phi = get_store(is);
  c.masks.m_g = get_mask(is);
  c.masks.m_d = get_mask(is);
  c.theta0 = get_store(is);
  c.phi0 = get_store(is);
  c.opt_g.t = get<std::int64_t>(is);
  c.opt_g.m = get_grads(is);
  c.opt_g.v = get_grads(is);
  c.opt_d.t = get<std::int64_t>(is);
  c.opt_d.m = get_grads(is);
  c.opt_d.v = get_grads(is);
  c.rng_state = get_string(is);
  return c;
}

}  // namespace tg
