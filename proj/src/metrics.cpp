#include "ticketgan/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tg {

GaussianStats fit_gaussian(const Mat& features) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw std::invalid_argument("fit_gaussian: need at least 2 samples");
  GaussianStats s;
  s.count = n;
  s.mu = features.colwise().mean();
  const Mat centered = features.rowwise() - s.mu.transpose();
  s.sigma = centered.transpose() * centered / static_cast<double>(n - 1);
  s.sigma += 1e-6 * Mat::Identity(features.cols(), features.cols());
  return s;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.mu.size() != b.mu.size())
    throw std::invalid_argument("frechet_distance: dimension mismatch");
  const double mean_term = (a.mu - b.mu).squaredNorm();
  const Mat prod = a.sigma * b.sigma;
  const Mat sym = 0.5 * (prod + prod.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("frechet_distance: eigendecomposition failed");
  double trace_sqrt = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    trace_sqrt += std::sqrt(std::max(0.0, eig.eigenvalues()[i]));
  const double fd =
      mean_term + a.sigma.trace() + b.sigma.trace() - 2.0 * trace_sqrt;
  if (!std::isfinite(fd))
    throw std::runtime_error("frechet_distance: non-finite result");
  return std::max(0.0, fd);
}

InceptionScore inception_score(const Mat& probs, int splits) {
  const Eigen::Index n = probs.rows();
  const Eigen::Index k = probs.cols();
  if (n < 1 || splits < 1 || n / splits < 1)
    throw std::invalid_argument("inception_score: invalid inputs");
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((probs.row(i).array() < -1e-12).any() ||
        std::abs(probs.row(i).sum() - 1.0) > 1e-6)
      throw std::invalid_argument("inception_score: rows must lie on the simplex");
  }
  const Eigen::Index per = n / splits;  // trailing remainder is truncated
  std::vector<double> scores;
  for (int s = 0; s < splits; ++s) {
    const Mat block = probs.middleRows(static_cast<Eigen::Index>(s) * per, per);
    const Eigen::RowVectorXd marginal = block.colwise().mean();
    double mean_kl = 0.0;
    for (Eigen::Index i = 0; i < per; ++i) {
      double kl = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double p = block(i, j);
        if (p > 0) kl += p * (std::log(p) - std::log(marginal[j]));
      }
      mean_kl += kl;
    }
    scores.push_back(std::exp(mean_kl / static_cast<double>(per)));
  }
  InceptionScore out;
  for (double v : scores) out.mean += v;
  out.mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double v : scores) var += (v - out.mean) * (v - out.mean);
  out.std_dev = std::sqrt(var / static_cast<double>(scores.size()));
  return out;
}

double d_accuracy(const Vec& fake_scores, double threshold) {
  if (fake_scores.size() == 0)
    throw std::invalid_argument("d_accuracy: empty scores");
  return static_cast<double>((fake_scores.array() < threshold).count()) /
         static_cast<double>(fake_scores.size());
}

DAccuracyGap d_accuracy_gap(const Vec& train_real_scores,
                            const Vec& val_real_scores, const Vec& fake_scores,
                            double threshold) {
  if (train_real_scores.size() == 0 || val_real_scores.size() == 0 ||
      fake_scores.size() == 0)
    throw std::invalid_argument("d_accuracy_gap: empty scores");
  DAccuracyGap g;
  const auto real_acc = [&](const Vec& s) {
    return static_cast<double>((s.array() > threshold).count()) /
           static_cast<double>(s.size());
  };
  g.fake = d_accuracy(fake_scores, threshold);
  g.real_train = real_acc(train_real_scores);
  g.train = 0.5 * (g.real_train + g.fake);
  g.val = 0.5 * (real_acc(val_real_scores) + g.fake);
  return g;
}

RingCoverage ring_coverage(const Mat& samples, const SyntheticSpec& spec,
                           double quality_radius) {
  if (samples.rows() < 1)
    throw std::invalid_argument("ring_coverage: empty samples");
  const Mat centers = ring_mode_centers(spec);
  const double min_count =
      static_cast<double>(samples.rows()) / (10.0 * spec.modes);
  std::vector<std::int64_t> per_mode(static_cast<std::size_t>(spec.modes), 0);
  std::int64_t hq = 0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (int k = 0; k < spec.modes; ++k) {
      const double d = (samples.row(i) - centers.row(k)).norm();
      if (d <= quality_radius) {
        ++per_mode[static_cast<std::size_t>(k)];
        ++hq;
        break;
      }
    }
  }
  RingCoverage out;
  for (int k = 0; k < spec.modes; ++k)
    if (static_cast<double>(per_mode[static_cast<std::size_t>(k)]) >= min_count)
      ++out.modes_covered;
  out.high_quality_fraction =
      static_cast<double>(hq) / static_cast<double>(samples.rows());
  return out;
}

Mat ring_mode_posteriors(const Mat& samples, const SyntheticSpec& spec) {
  const Mat centers = ring_mode_centers(spec);
  Mat probs(samples.rows(), spec.modes);
  const double inv2s2 = 1.0 / (2.0 * spec.std_dev * spec.std_dev);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    Eigen::VectorXd logits(spec.modes);
    for (int k = 0; k < spec.modes; ++k)
      logits[k] = -(samples.row(i) - centers.row(k)).squaredNorm() * inv2s2;
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    probs.row(i) = (e / e.sum()).transpose();
  }
  return probs;
}

namespace {

class IdentityExtractor final : public FeatureExtractor {
 public:
  explicit IdentityExtractor(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  Mat extract(const Mat& batch) override {
    if (batch.cols() != dim_)
      throw std::invalid_argument("identity extractor: dimension mismatch");
    return batch;
  }
  std::string id() const override { return "identity"; }

 private:
  int dim_;
};

// Frozen random strided conv stack with global average pooling.
class RandomConvExtractor final : public FeatureExtractor {
 public:
  RandomConvExtractor(Shape3 in, int dim, std::uint64_t seed) : dim_(dim) {
    int h = in.h;
    int c = in.c;
    int stage = 0;
    while (h > 4) {
      net_.add(std::make_unique<Conv2dLayer>(
          "fx.conv" + std::to_string(stage), Shape3{c, h, h}, dim, 4, 2, 1,
          false));
      net_.add(std::make_unique<TanhLayer>("fx.tanh" + std::to_string(stage),
                                           Shape3{dim, h / 2, h / 2}));
      c = dim;
      h /= 2;
      ++stage;
    }
    out_shape_ = Shape3{c, h, h};
    Rng rng(splitmix64(seed ^ 0xFE47));
    net_.init(rng);
  }

  int dim() const override { return dim_; }
  std::string id() const override { return "random_conv"; }

  Mat extract(const Mat& batch) override {
    Mat y = net_.forward(batch, false, nullptr);
    // global average pool over spatial positions
    const Eigen::Index hw =
        static_cast<Eigen::Index>(out_shape_.h) * out_shape_.w;
    Mat feats(y.rows(), out_shape_.c);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const Eigen::VectorXd row = y.row(i);
      Eigen::Map<const Mat> img(row.data(), hw, out_shape_.c);
      feats.row(i) = img.colwise().mean();
    }
    return feats;
  }

 private:
  int dim_;
  Network net_;
  Shape3 out_shape_;
};

}  // namespace

std::unique_ptr<FeatureExtractor> make_identity_extractor(int dim) {
  return std::make_unique<IdentityExtractor>(dim);
}

std::unique_ptr<FeatureExtractor> make_random_conv_extractor(Shape3 input,
                                                             int dim,
                                                             std::uint64_t seed) {
  return std::make_unique<RandomConvExtractor>(input, dim, seed);
}

}  // namespace tg
