#pragma once

#include <vector>

#include "ticketgan/layers.hpp"
#include "ticketgan/rng.hpp"

namespace tg {

// DiffAug-style differentiable policy. Color transforms first, then
// translation, then cutout. Point data (h == w == 1) passes through
// untouched and consumes no randomness.
struct AugPolicy {
  double translation_ratio = 0.0;  // in [0,1], shift up to floor(r*size)
  double cutout_ratio = 0.0;       // in [0,1], square side floor(r*size)
  double brightness_range = 0.0;   // add b ~ U(-r, r)
  double saturation_range = 0.0;   // scale s ~ U(1-r, 1+r) around channel mean
  double contrast_range = 0.0;     // scale c ~ U(1-r, 1+r) around image mean

  bool identity() const {
    return translation_ratio == 0.0 && cutout_ratio == 0.0 &&
           brightness_range == 0.0 && saturation_range == 0.0 &&
           contrast_range == 0.0;
  }
  void validate() const;
};

// Per-image draws recorded so the transform can be replayed backward.
struct AugDraw {
  double brightness = 0.0;
  double saturation = 1.0;
  double contrast = 1.0;
  int shift_i = 0, shift_j = 0;
  int cut_ci = 0, cut_cj = 0;  // cutout center
};

struct AugContext {
  Shape3 shape;
  AugPolicy policy;
  std::vector<AugDraw> draws;
};

// Applies the policy with per-image independent draws from `rng`.
// Gradients flow to input pixels through `aug_backward`.
Mat apply_policy(const Mat& images, Shape3 shape, const AugPolicy& policy,
                 Rng& rng, AugContext* ctx = nullptr);

// Re-applies a previously drawn context to a new batch of the same
// size (used when clean and perturbed branches must share one draw).
Mat aug_forward_with_draws(const Mat& images, const AugContext& ctx);

// dL/d(input images) given dL/d(augmented images)
Mat aug_backward(const Mat& d_out, const AugContext& ctx);

}  // namespace tg
