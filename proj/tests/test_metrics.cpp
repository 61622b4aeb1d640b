#include <cmath>

#include "doctest.h"
#include "ticketgan/metrics.hpp"
#include "ticketgan/rng.hpp"

using namespace tg;

namespace {

Mat randn(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double mu = 0.0,
          double sd = 1.0) {
  Rng rng(seed);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = mu + sd * rng.normal();
  return m;
}

// direct-summation inception score, no vectorized shortcuts
double is_oracle(const Mat& p) {
  Eigen::RowVectorXd marginal = Eigen::RowVectorXd::Zero(p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i) marginal += p.row(i);
  marginal /= static_cast<double>(p.rows());
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0) kl += p(i, j) * std::log(p(i, j) / marginal(j));
  return std::exp(kl / static_cast<double>(p.rows()));
}

}  // namespace

TEST_CASE("frechet distance matches the 1-d closed form") {
  // fd = (mu1-mu2)^2 + s1 + s2 - 2 sqrt(s1 s2) for 1-d gaussians
  GaussianStats a, b;
  a.mu = Vec::Constant(1, 1.0);
  a.sigma = Mat::Constant(1, 1, 4.0);
  b.mu = Vec::Constant(1, -2.0);
  b.sigma = Mat::Constant(1, 1, 9.0);
  const double expect = 9.0 + 4.0 + 9.0 - 2.0 * 6.0;
  CHECK(frechet_distance(a, b) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(frechet_distance(b, a) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(frechet_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("frechet distance on diagonal covariances sums the 1-d forms") {
  GaussianStats a, b;
  a.mu = Vec::Zero(3);
  b.mu = Vec::Zero(3);
  b.mu << 1.0, 0.0, -1.0;
  Vec sa(3), sb(3);
  sa << 1.0, 4.0, 0.25;
  sb << 2.0, 1.0, 0.25;
  a.sigma = sa.asDiagonal();
  b.sigma = sb.asDiagonal();
  double expect = 0.0;
  for (int i = 0; i < 3; ++i)
    expect += (a.mu[i] - b.mu[i]) * (a.mu[i] - b.mu[i]) + sa[i] + sb[i] -
              2.0 * std::sqrt(sa[i] * sb[i]);
  CHECK(frechet_distance(a, b) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("frechet distance is symmetric, nonnegative, and zero on self") {
  for (int trial = 0; trial < 20; ++trial) {
    const Mat fa = randn(200, 4, 50 + static_cast<std::uint64_t>(trial));
    const Mat fb =
        randn(180, 4, 500 + static_cast<std::uint64_t>(trial), 0.3, 1.4);
    const GaussianStats a = fit_gaussian(fa), b = fit_gaussian(fb);
    const double dab = frechet_distance(a, b);
    CHECK(dab >= 0.0);
    CHECK(dab == doctest::Approx(frechet_distance(b, a)).epsilon(1e-9));
    CHECK(frechet_distance(a, a) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("fit_gaussian uses the unbiased covariance plus a small ridge") {
  Mat f(3, 1);
  f << 0.0, 1.0, 2.0;
  const GaussianStats g = fit_gaussian(f);
  CHECK(g.mu[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.sigma(0, 0) == doctest::Approx(1.0 + 1e-6).epsilon(1e-12));
  CHECK(g.count == 3);
}

TEST_CASE("inception score closed forms") {
  // uniform posteriors carry zero information: IS = 1
  const Mat uniform = Mat::Constant(64, 5, 0.2);
  CHECK(inception_score(uniform, 1).mean == doctest::Approx(1.0).epsilon(1e-9));

  // balanced one-hot posteriors: IS = K
  const int k = 6;
  Mat onehot = Mat::Zero(60, k);
  for (int i = 0; i < 60; ++i) onehot(i, i % k) = 1.0;
  CHECK(inception_score(onehot, 1).mean ==
        doctest::Approx(static_cast<double>(k)).epsilon(1e-9));

  // two-row example: {[1,0],[0.5,0.5]}
  Mat p(2, 2);
  p << 1.0, 0.0, 0.5, 0.5;
  CHECK(inception_score(p, 1).mean ==
        doctest::Approx(is_oracle(p)).epsilon(1e-10));
  CHECK(inception_score(p, 1).mean == doctest::Approx(1.2408).epsilon(1e-4));
}

TEST_CASE("inception score matches the direct-summation oracle") {
  Rng rng(60);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 40, k = 7;
    Mat p(n, k);
    for (int i = 0; i < n; ++i) {
      double sum = 0;
      for (int j = 0; j < k; ++j) {
        p(i, j) = -std::log(1.0 - rng.uniform());
        sum += p(i, j);
      }
      p.row(i) /= sum;
    }
    const InceptionScore got = inception_score(p, 1);
    CHECK(std::abs(got.mean - is_oracle(p)) < 1e-10);
  }
}

TEST_CASE("split statistics") {
  // 4 splits of 10 rows; labels cycle mod 5 so every split is balanced
  Mat p = Mat::Zero(40, 5);
  for (int i = 0; i < 40; ++i) p(i, i % 5) = 1.0;
  const InceptionScore s = inception_score(p, 4);
  CHECK(s.mean == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.std_dev == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS(inception_score(p, 0));
  CHECK_THROWS(inception_score(p, 41));
}

TEST_CASE("inception score rejects non-simplex rows") {
  Mat p(1, 2);
  p << 0.7, 0.7;
  CHECK_THROWS(inception_score(p, 1));
  p << 0.5, 0.5;
  inception_score(p, 1);
}

TEST_CASE("d accuracy and the train/val gap") {
  Vec train(4), val(4), fake(4);
  train << 1.0, 2.0, 3.0, -1.0;   // 3/4 scored real
  val << 1.0, -2.0, -3.0, -1.0;   // 1/4 scored real
  fake << -1.0, -2.0, 3.0, -1.0;  // 3/4 scored fake
  CHECK(d_accuracy(fake) == 0.75);
  const DAccuracyGap g = d_accuracy_gap(train, val, fake);
  CHECK(g.real_train == 0.75);
  CHECK(g.fake == 0.75);
  CHECK(g.train == doctest::Approx(0.75));
  CHECK(g.val == doctest::Approx(0.5 * (0.25 + 0.75)));
  CHECK(g.gap() == doctest::Approx(0.25));
}

TEST_CASE("ring coverage counts well-populated modes") {
  SyntheticSpec spec;
  spec.modes = 4;
  spec.radius = 2.0;
  spec.std_dev = 0.01;
  const Mat centers = ring_mode_centers(spec);

  // all 100 samples sit on mode 0: one covered mode, all high quality
  Mat collapsed = centers.row(0).replicate(100, 1);
  RingCoverage rc = ring_coverage(collapsed, spec, 0.1);
  CHECK(rc.modes_covered == 1);
  CHECK(rc.high_quality_fraction == 1.0);

  // spread evenly: all 4 covered
  Mat spread(100, 2);
  for (int i = 0; i < 100; ++i) spread.row(i) = centers.row(i % 4);
  rc = ring_coverage(spread, spec, 0.1);
  CHECK(rc.modes_covered == 4);
  CHECK(rc.high_quality_fraction == 1.0);

  // far from every mode: nothing covered, nothing high quality
  rc = ring_coverage(Mat::Zero(100, 2), spec, 0.1);
  CHECK(rc.modes_covered == 0);
  CHECK(rc.high_quality_fraction == 0.0);
}

TEST_CASE("ring posteriors are a simplex concentrated on the nearest mode") {
  SyntheticSpec spec;
  spec.modes = 8;
  spec.std_dev = 0.05;
  const Mat centers = ring_mode_centers(spec);
  const Mat p = ring_mode_posteriors(centers, spec);
  CHECK(p.rows() == 8);
  CHECK(p.cols() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
    Eigen::Index argmax;
    p.row(i).maxCoeff(&argmax);
    CHECK(argmax == i);
  }
}

TEST_CASE("feature extractors") {
  auto id = make_identity_extractor(5);
  const Mat x = randn(3, 5, 70);
  CHECK(id->extract(x) == x);
  CHECK(id->dim() == 5);

  auto conv = make_random_conv_extractor({3, 16, 16}, 32, 7);
  auto conv2 = make_random_conv_extractor({3, 16, 16}, 32, 7);
  const Mat img = randn(2, 3 * 16 * 16, 71);
  const Mat f = conv->extract(img);
  CHECK(f.rows() == 2);
  CHECK(f.cols() == 32);
  CHECK(f == conv2->extract(img));  // frozen weights, same seed
}
