#include "doctest.h"
#include "ticketgan/dataaug.hpp"

using namespace tg;

namespace {

Mat random_images(int n, Shape3 s, std::uint64_t seed) {
  Rng rng(seed);
  Mat x(n, s.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-1.0, 1.0);
  return x;
}

// finite-difference check of aug_backward against the recorded draw
void aug_grad_check(const AugPolicy& policy, Shape3 shape) {
  const Mat x = random_images(2, shape, 77);
  Rng rng(3);
  AugContext ctx;
  apply_policy(x, shape, policy, rng, &ctx);

  // scalar loss: sum of 0.5 * y^2 over the augmented batch
  const auto loss_of = [&](const Mat& in) {
    const Mat y = aug_forward_with_draws(in, ctx);
    return 0.5 * y.array().square().sum();
  };
  const Mat y = aug_forward_with_draws(x, ctx);
  const Mat dx = aug_backward(y, ctx);

  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Mat xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const double fd = (loss_of(xp) - loss_of(xm)) / (2 * h);
    CHECK(dx(i) == doctest::Approx(fd).epsilon(1e-5));
  }
}

}  // namespace

TEST_CASE("identity policy is a no-op and consumes no randomness") {
  const Shape3 s{3, 8, 8};
  const Mat x = random_images(4, s, 1);
  Rng rng(9);
  const std::string before = rng.serialize();
  const Mat y = apply_policy(x, s, AugPolicy{}, rng);
  CHECK((y - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rng.serialize() == before);
}

TEST_CASE("point data passes through untouched") {
  const Shape3 s{2, 1, 1};
  const Mat x = random_images(5, s, 2);
  AugPolicy p;
  p.translation_ratio = 0.2;
  p.cutout_ratio = 0.5;
  p.brightness_range = 0.3;
  Rng rng(10);
  const std::string before = rng.serialize();
  const Mat y = apply_policy(x, s, p, rng);
  CHECK((y - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rng.serialize() == before);
}

TEST_CASE("cutout zeroes one square of the expected size on a 4x4 image") {
  const Shape3 s{1, 4, 4};
  AugPolicy p;
  p.cutout_ratio = 0.5;  // floor(0.5*4) = 2x2 square
  const Mat x = Mat::Ones(1, s.size());
  Rng rng(11);
  const Mat y = apply_policy(x, s, p, rng);
  int zeros = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    CHECK((y(i) == 0.0 || y(i) == 1.0));
    if (y(i) == 0.0) ++zeros;
  }
  CHECK(zeros == 4);
  // the zeroed cells form an axis-aligned 2x2 block
  int top = -1, left = -1;
  for (int i = 0; i < 4 && top < 0; ++i)
    for (int j = 0; j < 4; ++j)
      if (y(0, i * 4 + j) == 0.0) {
        top = i;
        left = j;
        break;
      }
  REQUIRE(top >= 0);
  CHECK(top <= 2);
  CHECK(left <= 2);
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      CHECK(y(0, (top + di) * 4 + (left + dj)) == 0.0);
}

TEST_CASE("translation shifts content and zero-pads") {
  const Shape3 s{1, 6, 6};
  AugPolicy p;
  p.translation_ratio = 0.5;
  const Mat x = random_images(3, s, 4);
  Rng rng(12);
  AugContext ctx;
  const Mat y = apply_policy(x, s, p, rng, &ctx);
  for (int n = 0; n < 3; ++n) {
    const auto& d = ctx.draws[static_cast<std::size_t>(n)];
    CHECK(std::abs(d.shift_i) <= 3);
    CHECK(std::abs(d.shift_j) <= 3);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const int si = i - d.shift_i, sj = j - d.shift_j;
        const double expect = (si >= 0 && si < 6 && sj >= 0 && sj < 6)
                                  ? x(n, si * 6 + sj)
                                  : 0.0;
        CHECK(y(n, i * 6 + j) == expect);
      }
  }
  CHECK(y.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("brightness adds one scalar per image") {
  const Shape3 s{3, 4, 4};
  AugPolicy p;
  p.brightness_range = 0.4;
  const Mat x = random_images(2, s, 5);
  Rng rng(13);
  AugContext ctx;
  const Mat y = apply_policy(x, s, p, rng, &ctx);
  for (int n = 0; n < 2; ++n) {
    const double b = ctx.draws[static_cast<std::size_t>(n)].brightness;
    CHECK(std::abs(b) <= 0.4);
    CHECK((y.row(n) - x.row(n)).cwiseAbs().maxCoeff() ==
          doctest::Approx(std::abs(b)).epsilon(1e-12));
  }
}

TEST_CASE("contrast scales around the whole-image mean") {
  const Shape3 s{1, 3, 3};
  AugPolicy p;
  p.contrast_range = 0.5;
  const Mat x = random_images(1, s, 6);
  Rng rng(14);
  AugContext ctx;
  const Mat y = apply_policy(x, s, p, rng, &ctx);
  const double c = ctx.draws[0].contrast;
  const double mean = x.row(0).mean();
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    CHECK(y(0, i) == doctest::Approx(mean + c * (x(0, i) - mean)).epsilon(1e-12));
}

TEST_CASE("per-transform gradients") {
  const Shape3 s{3, 5, 5};
  SUBCASE("brightness") {
    AugPolicy p;
    p.brightness_range = 0.3;
    aug_grad_check(p, s);
  }
  SUBCASE("saturation") {
    AugPolicy p;
    p.saturation_range = 0.4;
    aug_grad_check(p, s);
  }
  SUBCASE("contrast") {
    AugPolicy p;
    p.contrast_range = 0.4;
    aug_grad_check(p, s);
  }
  SUBCASE("translation") {
    AugPolicy p;
    p.translation_ratio = 0.4;
    aug_grad_check(p, s);
  }
  SUBCASE("cutout") {
    AugPolicy p;
    p.cutout_ratio = 0.4;
    aug_grad_check(p, s);
  }
  SUBCASE("all together") {
    AugPolicy p;
    p.brightness_range = 0.2;
    p.saturation_range = 0.2;
    p.contrast_range = 0.2;
    p.translation_ratio = 0.25;
    p.cutout_ratio = 0.25;
    aug_grad_check(p, s);
  }
}

TEST_CASE("replayed draws reproduce the transform exactly") {
  const Shape3 s{3, 6, 6};
  AugPolicy p;
  p.translation_ratio = 0.3;
  p.cutout_ratio = 0.3;
  p.brightness_range = 0.2;
  const Mat x = random_images(4, s, 7);
  Rng rng(15);
  AugContext ctx;
  const Mat y = apply_policy(x, s, p, rng, &ctx);
  CHECK((aug_forward_with_draws(x, ctx) - y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("same seed gives the same augmentation") {
  const Shape3 s{3, 6, 6};
  AugPolicy p;
  p.translation_ratio = 0.3;
  p.cutout_ratio = 0.3;
  p.contrast_range = 0.3;
  const Mat x = random_images(4, s, 8);
  Rng r1(16), r2(16);
  CHECK((apply_policy(x, s, p, r1) - apply_policy(x, s, p, r2))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("policy validation rejects out-of-range ratios") {
  AugPolicy p;
  p.translation_ratio = 1.5;
  CHECK_THROWS(p.validate());
  AugPolicy q;
  q.brightness_range = -0.1;
  CHECK_THROWS(q.validate());
  AugPolicy{}.validate();
}
