#pragma once

#include <cstdint>
#include <string>

#include "ticketgan/sparsity.hpp"
#include "ticketgan/trainer.hpp"

namespace tg {

// Little-endian binary container, magic "TKGN". Round trips are
// bit-exact, including RNG state and optimizer moments.
struct Checkpoint {
  std::uint32_t version = 1;
  std::int64_t iteration = 0;
  ParamStore theta;   // generator parameters
  ParamStore phi;     // discriminator parameters
  MaskPair masks;
  ParamStore theta0;  // init snapshots
  ParamStore phi0;
  AdamState opt_g;
  AdamState opt_d;
  std::string rng_state;
  std::uint64_t config_hash = 0;
};

enum class CheckpointError { bad_magic, bad_version, truncated, config_mismatch };

class checkpoint_error : public std::runtime_error {
 public:
  checkpoint_error(CheckpointError kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  CheckpointError kind() const { return kind_; }

 private:
  CheckpointError kind_;
};

void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

// FNV-1a over a canonical config rendering
std::uint64_t fnv1a64(const std::string& text);

}  // namespace tg
