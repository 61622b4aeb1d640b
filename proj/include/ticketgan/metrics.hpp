#pragma once

#include <memory>
#include <string>

#include "ticketgan/data.hpp"
#include "ticketgan/network.hpp"

namespace tg {

// (mu, Sigma) summary of extracted features
struct GaussianStats {
  Eigen::VectorXd mu;
  Mat sigma;
  std::int64_t count = 0;
};

// mu = sample mean, Sigma = unbiased covariance + 1e-6 I
GaussianStats fit_gaussian(const Mat& features);

// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}); square root via
// eigendecomposition of the symmetrized product with negative
// eigenvalues clamped at zero; the result is clamped at zero.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

// per-split exp(mean KL(p(y|x) || marginal)); returns mean and std
// across splits
struct InceptionScore {
  double mean = 0.0;
  double std_dev = 0.0;
};
InceptionScore inception_score(const Mat& probs, int splits);

// fraction of fake scores below the threshold (negative score = fake)
double d_accuracy(const Vec& fake_scores, double threshold = 0.0);

// Overfitting diagnostic: balanced accuracy of D with train reals vs
// with held-out reals, against one shared fake batch.
struct DAccuracyGap {
  double train = 0.0;  // 0.5 * (train reals scored real + fakes scored fake)
  double val = 0.0;    // same with held-out reals
  double real_train = 0.0;  // train reals scored real, alone
  double fake = 0.0;        // fakes scored fake, alone
  double gap() const { return train - val; }
};
DAccuracyGap d_accuracy_gap(const Vec& train_real_scores,
                            const Vec& val_real_scores, const Vec& fake_scores,
                            double threshold = 0.0);

// Mode-coverage diagnostic for ring data. A mode is covered when at
// least n/(10K) samples fall within quality_radius of its center.
struct RingCoverage {
  int modes_covered = 0;
  double high_quality_fraction = 0.0;
};
RingCoverage ring_coverage(const Mat& samples, const SyntheticSpec& spec,
                           double quality_radius);

// posteriors over ring modes from distances, usable for IS on 2-D data
Mat ring_mode_posteriors(const Mat& samples, const SyntheticSpec& spec);

// Deterministic feature map for FID at desk scale.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int dim() const = 0;
  virtual Mat extract(const Mat& batch) = 0;
  virtual std::string id() const = 0;
};

std::unique_ptr<FeatureExtractor> make_identity_extractor(int dim);
// fixed-seed random conv net over images, d output features
std::unique_ptr<FeatureExtractor> make_random_conv_extractor(Shape3 input,
                                                             int dim,
                                                             std::uint64_t seed);

}  // namespace tg
