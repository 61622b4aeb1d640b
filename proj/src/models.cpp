#include "ticketgan/models.hpp"

#include <stdexcept>

namespace tg {

Arch arch_from_string(const std::string& s) {
  if (s == "mlp_gan_2d") return Arch::mlp_gan_2d;
  if (s == "conv_gan_32") return Arch::conv_gan_32;
  throw std::invalid_argument("unknown architecture id: " + s);
}

std::string arch_to_string(Arch a) {
  return a == Arch::mlp_gan_2d ? "mlp_gan_2d" : "conv_gan_32";
}

ModelSpec ModelSpec::defaults(Arch a) {
  ModelSpec s;
  s.arch = a;
  if (a == Arch::mlp_gan_2d) {
    s.latent_dim = 8;
    s.width = 64;
  } else {
    s.latent_dim = 128;
    s.width = 64;
  }
  return s;
}

namespace {

Network build_mlp_generator(const ModelSpec& spec) {
  Network net;
  const int w = spec.width;
  Shape3 in{spec.latent_dim, 1, 1};
  net.add(std::make_unique<DenseLayer>("g.fc1", in, w, false));
  net.add(std::make_unique<ReluLayer>("g.relu1", Shape3{w, 1, 1}));
  net.add(std::make_unique<DenseLayer>("g.fc2", Shape3{w, 1, 1}, w, false));
  net.add(std::make_unique<ReluLayer>("g.relu2", Shape3{w, 1, 1}));
  net.add(std::make_unique<DenseLayer>("g.fc3", Shape3{w, 1, 1}, w, false));
  net.add(std::make_unique<ReluLayer>("g.relu3", Shape3{w, 1, 1}));
  net.add(std::make_unique<DenseLayer>("g.out", Shape3{w, 1, 1}, 2, false));
  return net;
}

Network build_mlp_discriminator(const ModelSpec& spec, bool sn) {
  Network net;
  const int w = spec.width;
  net.add(std::make_unique<DenseLayer>("d.fc1", Shape3{2, 1, 1}, w, sn));
  net.add(std::make_unique<ReluLayer>("d.lrelu1", Shape3{w, 1, 1}, 0.2));
  net.add(std::make_unique<DenseLayer>("d.fc2", Shape3{w, 1, 1}, w, sn));
  net.add(std::make_unique<ReluLayer>("d.lrelu2", Shape3{w, 1, 1}, 0.2));
  net.add(std::make_unique<DenseLayer>("d.fc3", Shape3{w, 1, 1}, w, sn));
  net.add(std::make_unique<ReluLayer>("d.lrelu3", Shape3{w, 1, 1}, 0.2));
  net.add(std::make_unique<DenseLayer>("d.out", Shape3{w, 1, 1}, 1, sn));
  return net;
}

Network build_conv_generator(const ModelSpec& spec) {
  Network net;
  const int w = spec.width;
  Shape3 in{spec.latent_dim, 1, 1};
  // latent -> 4x4 map, then three 2x upsampling stages to 32x32
  net.add(std::make_unique<DenseLayer>("g.proj", in, 4 * w * 16, false));
  net.add(std::make_unique<ReshapeLayer>("g.reshape", Shape3{4 * w * 16, 1, 1},
                                          Shape3{4 * w, 4, 4}));
  net.add(std::make_unique<ReluLayer>("g.relu0", Shape3{4 * w, 4, 4}));
  net.add(std::make_unique<ConvTranspose2dLayer>("g.up1", Shape3{4 * w, 4, 4},
                                                 2 * w, 4, 2, 1));
  net.add(std::make_unique<ReluLayer>("g.relu1", Shape3{2 * w, 8, 8}));
  net.add(std::make_unique<ConvTranspose2dLayer>("g.up2", Shape3{2 * w, 8, 8}, w,
                                                 4, 2, 1));
  net.add(std::make_unique<ReluLayer>("g.relu2", Shape3{w, 16, 16}));
  net.add(std::make_unique<ConvTranspose2dLayer>("g.up3", Shape3{w, 16, 16}, w,
                                                 4, 2, 1));
  net.add(std::make_unique<ReluLayer>("g.relu3", Shape3{w, 32, 32}));
  net.add(std::make_unique<Conv2dLayer>("g.torgb", Shape3{w, 32, 32}, 3, 3, 1, 1,
                                        false));
  net.add(std::make_unique<TanhLayer>("g.tanh", Shape3{3, 32, 32}));
  return net;
}

Network build_conv_discriminator(const ModelSpec& spec, bool sn) {
  Network net;
  const int w = spec.width;
  net.add(std::make_unique<Conv2dLayer>("d.conv1", Shape3{3, 32, 32}, w, 4, 2, 1,
                                        sn));
  net.add(std::make_unique<ReluLayer>("d.lrelu1", Shape3{w, 16, 16}, 0.2));
  net.add(std::make_unique<Conv2dLayer>("d.conv2", Shape3{w, 16, 16}, 2 * w, 4,
                                        2, 1, sn));
  net.add(std::make_unique<ReluLayer>("d.lrelu2", Shape3{2 * w, 8, 8}, 0.2));
  net.add(std::make_unique<Conv2dLayer>("d.conv3", Shape3{2 * w, 8, 8}, 4 * w, 4,
                                        2, 1, sn));
  net.add(std::make_unique<ReluLayer>("d.lrelu3", Shape3{4 * w, 4, 4}, 0.2));
  net.add(std::make_unique<ReshapeLayer>("d.flatten", Shape3{4 * w, 4, 4},
                                          Shape3{4 * w * 16, 1, 1}));
  net.add(std::make_unique<DenseLayer>("d.out", Shape3{4 * w * 16, 1, 1}, 1, sn));
  return net;
}

}  // namespace

Network build_generator(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.latent_dim <= 0 || spec.width <= 0)
    throw std::invalid_argument("invalid model spec");
  Network net = spec.arch == Arch::mlp_gan_2d ? build_mlp_generator(spec)
                                              : build_conv_generator(spec);
  Rng rng(splitmix64(seed ^ 0x67656e /* "gen" */));
  net.init(rng);
  return net;
}

Network build_discriminator(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.latent_dim <= 0 || spec.width <= 0)
    throw std::invalid_argument("invalid model spec");
  const bool sn =
      spec.spectral_norm.value_or(spec.arch == Arch::conv_gan_32);
  Network net = spec.arch == Arch::mlp_gan_2d
                    ? build_mlp_discriminator(spec, sn)
                    : build_conv_discriminator(spec, sn);
  Rng rng(splitmix64(seed ^ 0x646973 /* "dis" */));
  net.init(rng);
  return net;
}

int resolve_d_split(const ModelSpec& spec, const Network& d) {
  if (spec.d_split > 0) return spec.d_split;
  return static_cast<int>(d.param_layer_count()) - 1;
}

}  // namespace tg
