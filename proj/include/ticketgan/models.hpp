#pragma once

#include <optional>
#include <string>

#include "ticketgan/network.hpp"

namespace tg {

enum class Arch { mlp_gan_2d, conv_gan_32 };

Arch arch_from_string(const std::string& s);
std::string arch_to_string(Arch a);

struct ModelSpec {
  Arch arch = Arch::mlp_gan_2d;
  int latent_dim = 8;          // 128 for conv_gan_32
  int width = 64;              // hidden width (mlp) / channel base (conv)
  int g_split = 1;             // after first parameterized layer of G
  int d_split = -1;            // -1 = before last parameterized layer of D
  std::optional<bool> spectral_norm;  // default: on for conv D, off for mlp D

  static ModelSpec defaults(Arch a);
};

// Deterministic construction given (spec, seed).
Network build_generator(const ModelSpec& spec, std::uint64_t seed);
Network build_discriminator(const ModelSpec& spec, std::uint64_t seed);

// resolved split values (d_split = -1 resolves against the built net)
int resolve_d_split(const ModelSpec& spec, const Network& d);

}  // namespace tg
