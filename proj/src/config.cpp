#include "ticketgan/config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ticketgan/checkpoint.hpp"

namespace tg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not a real number: " + v);
  return x;
}

std::int64_t parse_int(const std::string& v) {
  std::size_t pos = 0;
  const std::int64_t x = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not an integer: " + v);
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& registry() {
  static const std::map<std::string, Setter> reg = {
      {"seed", [](auto& c, const auto& v) { c.seed = static_cast<std::uint64_t>(parse_int(v)); }},
      {"out_dir", [](auto& c, const auto& v) { c.out_dir = v; }},

      {"model.arch", [](auto& c, const auto& v) {
         c.model = ModelSpec::defaults(arch_from_string(v));
       }},
      {"model.latent_dim", [](auto& c, const auto& v) {
         c.model.latent_dim = static_cast<int>(parse_int(v));
         if (c.model.latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
       }},
      {"model.width", [](auto& c, const auto& v) {
         c.model.width = static_cast<int>(parse_int(v));
         if (c.model.width < 1) throw std::invalid_argument("width must be >= 1");
       }},
      {"model.g_split", [](auto& c, const auto& v) {
         c.model.g_split = static_cast<int>(parse_int(v));
       }},
      {"model.d_split", [](auto& c, const auto& v) {
         c.model.d_split = static_cast<int>(parse_int(v));
       }},
      {"model.spectral_norm", [](auto& c, const auto& v) {
         c.model.spectral_norm = parse_bool(v);
       }},

      {"train.lr_g", [](auto& c, const auto& v) {
         c.train.lr_g = parse_real(v);
         if (c.train.lr_g <= 0) throw std::invalid_argument("lr_g must be positive");
       }},
      {"train.lr_d", [](auto& c, const auto& v) {
         c.train.lr_d = parse_real(v);
         if (c.train.lr_d <= 0) throw std::invalid_argument("lr_d must be positive");
       }},
      {"train.batch_size", [](auto& c, const auto& v) {
         c.train.batch_size = static_cast<int>(parse_int(v));
         if (c.train.batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
       }},
      {"train.iterations", [](auto& c, const auto& v) {
         c.train.total_iterations = parse_int(v);
         if (c.train.total_iterations < 1) throw std::invalid_argument("iterations must be >= 1");
       }},
      {"train.d_steps_per_g", [](auto& c, const auto& v) {
         c.train.d_steps_per_g = static_cast<int>(parse_int(v));
         if (c.train.d_steps_per_g < 1) throw std::invalid_argument("d_steps_per_g must be >= 1");
       }},
      {"train.beta1", [](auto& c, const auto& v) {
         c.train.beta1 = parse_real(v);
         if (c.train.beta1 < 0 || c.train.beta1 >= 1) throw std::invalid_argument("beta1 must lie in [0,1)");
       }},
      {"train.beta2", [](auto& c, const auto& v) {
         c.train.beta2 = parse_real(v);
         if (c.train.beta2 < 0 || c.train.beta2 >= 1) throw std::invalid_argument("beta2 must lie in [0,1)");
       }},
      {"train.loss", [](auto& c, const auto& v) {
         c.train.loss.variant = loss_from_string(v);
       }},

      {"prune.rho", [](auto& c, const auto& v) {
         c.prune.rho = parse_real(v);
         if (!(c.prune.rho > 0 && c.prune.rho < 1))
           throw std::invalid_argument("prune.rho must lie in (0,1)");
       }},
      {"prune.rounds", [](auto& c, const auto& v) {
         c.prune.rounds = static_cast<int>(parse_int(v));
         if (c.prune.rounds < 0) throw std::invalid_argument("rounds must be >= 0");
       }},
      {"prune.epochs_per_round", [](auto& c, const auto& v) {
         c.prune.epochs_per_round = static_cast<int>(parse_int(v));
         if (c.prune.epochs_per_round < 1)
           throw std::invalid_argument("epochs_per_round must be >= 1");
       }},

      {"advaug.steps", [](auto& c, const auto& v) {
         c.advaug.steps = static_cast<int>(parse_int(v));
         if (c.advaug.steps < 0) throw std::invalid_argument("steps must be >= 0");
       }},
      {"advaug.step_size", [](auto& c, const auto& v) {
         c.advaug.step_size = parse_real(v);
         if (c.advaug.step_size < 0) throw std::invalid_argument("step_size must be >= 0");
       }},
      {"advaug.epsilon", [](auto& c, const auto& v) {
         c.advaug.epsilon = parse_real(v);
         c.epsilon_explicit = true;
         if (c.advaug.epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
       }},
      {"advaug.lambda1", [](auto& c, const auto& v) {
         c.advaug.lambda1 = parse_real(v);
         if (c.advaug.lambda1 < 0) throw std::invalid_argument("lambda1 must be >= 0");
       }},
      {"advaug.lambda2", [](auto& c, const auto& v) {
         c.advaug.lambda2 = parse_real(v);
         if (c.advaug.lambda2 < 0) throw std::invalid_argument("lambda2 must be >= 0");
       }},
      {"advaug.perturb_generator", [](auto& c, const auto& v) {
         c.advaug.perturb_generator = parse_bool(v);
       }},
      {"advaug.perturb_real", [](auto& c, const auto& v) {
         c.advaug.perturb_real = parse_bool(v);
       }},
      {"advaug.perturb_fake", [](auto& c, const auto& v) {
         c.advaug.perturb_fake = parse_bool(v);
       }},

      {"aug.translation", [](auto& c, const auto& v) {
         c.aug.translation_ratio = parse_real(v);
       }},
      {"aug.cutout", [](auto& c, const auto& v) {
         c.aug.cutout_ratio = parse_real(v);
       }},
      {"aug.brightness", [](auto& c, const auto& v) {
         c.aug.brightness_range = parse_real(v);
       }},
      {"aug.saturation", [](auto& c, const auto& v) {
         c.aug.saturation_range = parse_real(v);
       }},
      {"aug.contrast", [](auto& c, const auto& v) {
         c.aug.contrast_range = parse_real(v);
       }},

      {"data.source", [](auto& c, const auto& v) {
         if (v != "ring" && v != "synthetic_images" && v != "folder")
           throw std::invalid_argument("unknown data source: " + v);
         c.data_source = v;
       }},
      {"data.n", [](auto& c, const auto& v) {
         c.data_n = parse_int(v);
         if (c.data_n < 1) throw std::invalid_argument("data.n must be >= 1");
       }},
      {"data.fraction", [](auto& c, const auto& v) {
         c.data_fraction = parse_real(v);
         if (!(c.data_fraction > 0 && c.data_fraction <= 1))
           throw std::invalid_argument("data.fraction must lie in (0,1]");
       }},
      {"data.manifest", [](auto& c, const auto& v) { c.data_manifest = v; }},
      {"data.folder", [](auto& c, const auto& v) { c.data_folder = v; }},
      {"data.image_size", [](auto& c, const auto& v) {
         c.image_size = static_cast<int>(parse_int(v));
         if (c.image_size < 4) throw std::invalid_argument("image_size must be >= 4");
       }},
      {"data.ring_modes", [](auto& c, const auto& v) {
         c.ring_modes = static_cast<int>(parse_int(v));
         if (c.ring_modes < 1) throw std::invalid_argument("ring_modes must be >= 1");
       }},
      {"data.ring_radius", [](auto& c, const auto& v) {
         c.ring_radius = parse_real(v);
       }},
      {"data.ring_std", [](auto& c, const auto& v) {
         c.ring_std = parse_real(v);
         if (c.ring_std <= 0) throw std::invalid_argument("ring_std must be positive");
       }},

      {"metrics.extractor", [](auto& c, const auto& v) {
         if (v != "identity" && v != "random_conv")
           throw std::invalid_argument("unknown extractor: " + v);
         c.metrics_extractor = v;
       }},
      {"metrics.eval_samples", [](auto& c, const auto& v) {
         c.metrics_eval_samples = static_cast<int>(parse_int(v));
         if (c.metrics_eval_samples < 2)
           throw std::invalid_argument("eval_samples must be >= 2");
       }},
      {"metrics.reference", [](auto& c, const auto& v) {
         if (v != "train" && v != "val")
           throw std::invalid_argument("metrics.reference must be train or val");
         c.metrics_reference = v;
       }},
      {"metrics.interval", [](auto& c, const auto& v) {
         c.metrics_interval = parse_int(v);
         if (c.metrics_interval < 1) throw std::invalid_argument("interval must be >= 1");
       }},
      {"metrics.ring_quality_radius", [](auto& c, const auto& v) {
         c.ring_quality_radius = parse_real(v);
         if (c.ring_quality_radius <= 0)
           throw std::invalid_argument("quality radius must be positive");
       }},
      {"checkpoint.interval", [](auto& c, const auto& v) {
         c.checkpoint_interval = parse_int(v);
         if (c.checkpoint_interval < 0)
           throw std::invalid_argument("checkpoint.interval must be >= 0");
       }},
  };
  return reg;
}

void finalize(ExperimentConfig& cfg) {
  // the reachable set of the sign-step iteration
  if (!cfg.epsilon_explicit && cfg.advaug.steps > 0 && cfg.advaug.step_size > 0)
    cfg.advaug.epsilon = cfg.advaug.steps * cfg.advaug.step_size;
  cfg.train.seed = cfg.seed;
  cfg.train.latent_dim = cfg.model.latent_dim;
  if (!cfg.data_manifest.empty() &&
      !std::filesystem::exists(cfg.data_manifest))
    throw std::invalid_argument("data.manifest path does not exist: " +
                                cfg.data_manifest);
  if (!cfg.data_folder.empty() && !std::filesystem::is_directory(cfg.data_folder))
    throw std::invalid_argument("data.folder path does not exist: " +
                                cfg.data_folder);
  cfg.advaug.g_split = cfg.model.g_split;
  cfg.advaug.d_split = cfg.model.d_split;
  cfg.advaug.validate();
  cfg.aug.validate();
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  const auto& reg = registry();
  auto it = reg.find(key);
  if (it == reg.end())
    throw std::invalid_argument("unknown config key: " + key);
  it->second(cfg, value);
  finalize(cfg);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.model = ModelSpec::defaults(Arch::mlp_gan_2d);
  const auto& reg = registry();
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": expected `key = value`, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = reg.find(key);
    if (it == reg.end())
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": unknown config key: " + key);
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ", key " +
                                  key + ": " + e.what());
    }
  }
  finalize(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "seed=" << seed << "\nmodel.arch=" << arch_to_string(model.arch)
     << "\nmodel.latent_dim=" << model.latent_dim
     << "\nmodel.width=" << model.width << "\nmodel.g_split=" << model.g_split
     << "\nmodel.d_split=" << model.d_split << "\nmodel.spectral_norm="
     << (model.spectral_norm ? (*model.spectral_norm ? "on" : "off") : "auto")
     << "\ntrain.lr_g=" << train.lr_g << "\ntrain.lr_d=" << train.lr_d
     << "\ntrain.batch_size=" << train.batch_size
     << "\ntrain.iterations=" << train.total_iterations
     << "\ntrain.d_steps_per_g=" << train.d_steps_per_g
     << "\ntrain.beta1=" << train.beta1 << "\ntrain.beta2=" << train.beta2
     << "\ntrain.loss=" << loss_to_string(train.loss.variant)
     << "\nprune.rho=" << prune.rho << "\nprune.rounds=" << prune.rounds
     << "\nprune.epochs_per_round=" << prune.epochs_per_round
     << "\nadvaug.steps=" << advaug.steps
     << "\nadvaug.step_size=" << advaug.step_size
     << "\nadvaug.epsilon=" << advaug.epsilon
     << "\nadvaug.lambda1=" << advaug.lambda1
     << "\nadvaug.lambda2=" << advaug.lambda2
     << "\nadvaug.perturb_generator=" << advaug.perturb_generator
     << "\nadvaug.perturb_real=" << advaug.perturb_real
     << "\nadvaug.perturb_fake=" << advaug.perturb_fake
     << "\naug.translation=" << aug.translation_ratio
     << "\naug.cutout=" << aug.cutout_ratio
     << "\naug.brightness=" << aug.brightness_range
     << "\naug.saturation=" << aug.saturation_range
     << "\naug.contrast=" << aug.contrast_range
     << "\ndata.source=" << data_source << "\ndata.n=" << data_n
     << "\ndata.fraction=" << data_fraction
     << "\ndata.manifest=" << data_manifest << "\ndata.folder=" << data_folder
     << "\ndata.image_size=" << image_size << "\ndata.ring_modes=" << ring_modes
     << "\ndata.ring_radius=" << ring_radius << "\ndata.ring_std=" << ring_std
     << "\nmetrics.extractor=" << metrics_extractor
     << "\nmetrics.eval_samples=" << metrics_eval_samples
     << "\nmetrics.reference=" << metrics_reference
     << "\nmetrics.interval=" << metrics_interval
     << "\nmetrics.ring_quality_radius=" << ring_quality_radius
     << "\ncheckpoint.interval=" << checkpoint_interval << "\n";
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical_text()); }

}  // namespace tg
