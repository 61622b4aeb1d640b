#include "ticketgan/trainer.hpp"

#include <cmath>
#include <stdexcept>

namespace tg {

void TrainConfig::validate() const {
  if (lr_g <= 0 || lr_d <= 0)
    throw std::invalid_argument("learning rates must be positive");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (total_iterations < 1)
    throw std::invalid_argument("total_iterations must be >= 1");
  if (d_steps_per_g < 1)
    throw std::invalid_argument("d_steps_per_g must be >= 1");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
    throw std::invalid_argument("optimizer moments must lie in [0,1)");
  if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
}

void adam_update(ParamStore& params, const GradStore& grads, AdamState& opt,
                 double lr, double beta1, double beta2) {
  if (opt.m.empty()) {
    opt.m = zeros_like(params);
    opt.v = zeros_like(params);
  }
  ++opt.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(opt.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(opt.t));
  for (const auto& name : params.names()) {
    const Mat& g = grads.at(name);
    if ((g.array() == 0.0).all()) continue;
    Mat& m = opt.m.at(name);
    Mat& v = opt.v.at(name);
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v.array() + (1.0 - beta2) * g.array().square();
    params.at(name).array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + 1e-8);
  }
}

GanTrainer::GanTrainer(Network& g, Network& d, const DataSource& source,
                       const DatasetManifest& manifest, const TrainConfig& cfg,
                       const AdvConfig& adv, const AugPolicy& aug,
                       const MaskPair* masks)
    : g_(&g), d_(&d), source_(&source), manifest_(&manifest), cfg_(cfg),
      adv_(adv), aug_(aug), masks_(masks), state_{0, Rng(cfg.seed), {}, {}} {
  cfg_.validate();
  adv_.validate();
  aug_.validate();
  if (manifest_->indices.empty())
    throw std::invalid_argument("empty dataset manifest");
  if (masks_) {
    validate_mask(g_->params(), masks_->m_g);
    validate_mask(d_->params(), masks_->m_d);
    apply_mask(g_->params(), masks_->m_g);
    apply_mask(d_->params(), masks_->m_d);
  }
  resolved_d_split_ = adv_.d_split > 0
                          ? adv_.d_split
                          : static_cast<int>(d_->param_layer_count()) - 1;
}

Mat GanTrainer::sample_latents(int n) {
  Mat z(n, cfg_.latent_dim);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = state_.rng.normal();
  return z;
}

Mat GanTrainer::generate(int n, std::uint64_t eval_seed) {
  Rng rng(splitmix64(eval_seed ^ 0x5eed));
  Mat z(n, cfg_.latent_dim);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = rng.normal();
  return g_->forward(z, false, nullptr);
}

Mat GanTrainer::next_real_batch() {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(cfg_.batch_size));
  const auto n = static_cast<std::int64_t>(manifest_->indices.size());
  for (auto& i : idx) i = manifest_->indices[static_cast<std::size_t>(
                          state_.rng.uniform_int(n))];
  return source_->gather(idx);
}

std::int64_t iterations_per_epoch(std::size_t manifest_size,
                                  const TrainConfig& cfg) {
  const auto n = static_cast<std::int64_t>(manifest_size);
  const std::int64_t per_iter =
      static_cast<std::int64_t>(cfg.batch_size) * cfg.d_steps_per_g;
  return std::max<std::int64_t>(1, (n + per_iter - 1) / per_iter);
}

void GanTrainer::d_update() {
  const bool adv_on = adv_.active();
  const Shape3 img_shape = g_->output_shape();

  Mat reals = next_real_batch();
  Mat z = sample_latents(cfg_.batch_size);
  Mat fakes = g_->forward(z, false, nullptr);

  AugContext ctx_r, ctx_f;
  Mat reals_aug = apply_policy(reals, img_shape, aug_, state_.rng, &ctx_r);
  Mat fakes_aug = apply_policy(fakes, img_shape, aug_, state_.rng, &ctx_f);

  GradStore grads = zeros_like(d_->params());
  const std::size_t b = d_->split_boundary(resolved_d_split_);

  Caches cr = d_->make_caches();
  Caches cf = d_->make_caches();
  Mat hr = d_->forward_range(0, b, reals_aug, true, &cr);
  Mat hf = d_->forward_range(0, b, fakes_aug, true, &cf);
  Mat sr_m = d_->forward_range(b, d_->layer_count(), hr, true, &cr);
  Mat sf_m = d_->forward_range(b, d_->layer_count(), hf, true, &cf);
  const Vec sr = sr_m.col(0);
  const Vec sf = sf_m.col(0);
  last_.d_loss = discriminator_loss(sr, sf, cfg_.loss);
  if (!std::isfinite(last_.d_loss))
    throw std::runtime_error("discriminator loss is non-finite");

  Vec d_sr, d_sf;
  discriminator_loss_grad(sr, sf, cfg_.loss, d_sr, d_sf);
  Mat dhr = d_->backward_range(b, d_->layer_count(), d_sr, grads, cr);
  Mat dhf = d_->backward_range(b, d_->layer_count(), d_sf, grads, cf);

  last_.d_adv_loss = 0.0;
  if (adv_on && adv_.lambda2 > 0 && (adv_.perturb_real || adv_.perturb_fake)) {
    auto branch = [&](const Mat& h, double score_sign, bool enabled,
                      Mat& dh_accum) {
      Mat delta = Mat::Zero(h.rows(), h.cols());
      if (enabled) {
        PgdObjective obj = [&](const Mat& hp) {
          Caches c = d_->make_caches();
          const Vec s =
              d_->forward_range(b, d_->layer_count(), hp, false, &c).col(0);
          const double n = static_cast<double>(s.size());
          double value = 0.0;
          Vec ds(s.size());
          for (Eigen::Index i = 0; i < s.size(); ++i) {
            value += f_d_loss(score_sign * s[i], cfg_.loss) / n;
            ds[i] = score_sign * f_d_grad(score_sign * s[i], cfg_.loss) / n;
          }
          GradStore scratch = zeros_like(d_->params());
          Mat dh = d_->backward_range(b, d_->layer_count(), ds, scratch, c);
          return std::make_pair(value, dh);
        };
        delta = pgd_feature_perturb(h, obj, adv_, PgdDirection::ascend);
      }
      Caches c = d_->make_caches();
      const Mat hp = h + delta;
      const Vec s = d_->forward_range(b, d_->layer_count(), hp, false, &c).col(0);
      const double n = static_cast<double>(s.size());
      double value = 0.0;
      Vec ds(s.size());
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        value += f_d_loss(score_sign * s[i], cfg_.loss) / n;
        ds[i] = adv_.lambda2 * score_sign *
                f_d_grad(score_sign * s[i], cfg_.loss) / n;
      }
      dh_accum += d_->backward_range(b, d_->layer_count(), ds, grads, c);
      return value;
    };
    last_.d_adv_loss += branch(hr, -1.0, adv_.perturb_real, dhr);
    last_.d_adv_loss += branch(hf, +1.0, adv_.perturb_fake, dhf);
  }

  d_->backward_range(0, b, dhr, grads, cr);
  d_->backward_range(0, b, dhf, grads, cf);

  adam_update(d_->params(), grads, state_.opt_d, cfg_.lr_d, cfg_.beta1,
              cfg_.beta2);
  if (masks_) apply_mask(d_->params(), masks_->m_d);
}

void GanTrainer::g_update() {
  const bool adv_on =
      adv_.active() && adv_.lambda1 > 0 && adv_.perturb_generator;
  const Shape3 img_shape = g_->output_shape();
  const std::size_t gb = g_->split_boundary(adv_.g_split);

  Mat z = sample_latents(cfg_.batch_size);

  GradStore grads_g = zeros_like(g_->params());
  GradStore scratch_d = zeros_like(d_->params());

  Caches cg = g_->make_caches();
  Mat h = g_->forward_range(0, gb, z, true, &cg);
  Mat images = g_->forward_range(gb, g_->layer_count(), h, true, &cg);

  AugContext ctx;
  Mat images_aug = apply_policy(images, img_shape, aug_, state_.rng, &ctx);

  Caches cd = d_->make_caches();
  const Vec s = d_->forward(images_aug, false, &cd).col(0);
  last_.g_loss = generator_loss(s, cfg_.loss);
  if (!std::isfinite(last_.g_loss))
    throw std::runtime_error("generator loss is non-finite");

  Mat dimg_aug =
      d_->backward_range(0, d_->layer_count(), generator_loss_grad(s, cfg_.loss),
                         scratch_d, cd);
  Mat dimg = aug_backward(dimg_aug, ctx);
  Mat dh = g_->backward_range(gb, g_->layer_count(), dimg, grads_g, cg);

  last_.g_adv_loss = 0.0;
  if (adv_on) {
    // the adversarial branch shares the clean branch's augmentation draw
    PgdObjective obj = [&](const Mat& hp) {
      Caches c2 = g_->make_caches();
      Caches c3 = d_->make_caches();
      Mat img = g_->forward_range(gb, g_->layer_count(), hp, false, &c2);
      Mat img_a = aug_forward_with_draws(img, ctx);
      const Vec sp = d_->forward(img_a, false, &c3).col(0);
      const double value = generator_loss(sp, cfg_.loss);
      GradStore sg = zeros_like(g_->params());
      GradStore sd = zeros_like(d_->params());
      Mat di = d_->backward_range(0, d_->layer_count(),
                                  generator_loss_grad(sp, cfg_.loss), sd, c3);
      Mat dh2 = g_->backward_range(gb, g_->layer_count(), aug_backward(di, ctx),
                                   sg, c2);
      return std::make_pair(value, dh2);
    };
    Mat delta = pgd_feature_perturb(h, obj, adv_, PgdDirection::ascend);

    Caches c2 = g_->make_caches();
    Caches c3 = d_->make_caches();
    Mat img = g_->forward_range(gb, g_->layer_count(), h + delta, false, &c2);
    Mat img_a = aug_forward_with_draws(img, ctx);
    const Vec sp = d_->forward(img_a, false, &c3).col(0);
    last_.g_adv_loss = generator_loss(sp, cfg_.loss);
    Mat ds = adv_.lambda1 * generator_loss_grad(sp, cfg_.loss);
    Mat di = d_->backward_range(0, d_->layer_count(), ds, scratch_d, c3);
    dh += g_->backward_range(gb, g_->layer_count(), aug_backward(di, ctx),
                             grads_g, c2);
  }

  g_->backward_range(0, gb, dh, grads_g, cg);
  adam_update(g_->params(), grads_g, state_.opt_g, cfg_.lr_g, cfg_.beta1,
              cfg_.beta2);
  if (masks_) apply_mask(g_->params(), masks_->m_g);
}

StepLosses GanTrainer::step() {
  if (state_.iteration >= cfg_.total_iterations)
    throw std::runtime_error("training already finished");
  for (int k = 0; k < cfg_.d_steps_per_g; ++k) d_update();
  g_update();
  ++state_.iteration;
  return last_;
}

}  // namespace tg
