// Synthetic wild pools with known ground truth, the simulated human oracle,
// and the analytic maximum-ambiguity threshold.
#ifndef WILDLABEL_WILDGEN_HPP
#define WILDLABEL_WILDGEN_HPP

#include "wildlabel/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace wildlabel {

struct GaussianComponent {
  double mean = 0.0;
  double std_dev = 1.0;
  double weight = 1.0;
};

/// Finite 1-D Gaussian mixture with closed-form pdf and cdf.
class GaussianMixture1D {
 public:
  GaussianMixture1D() = default;
  explicit GaussianMixture1D(std::vector<GaussianComponent> components);

  static GaussianMixture1D single(double mean, double std_dev) {
    return GaussianMixture1D({{mean, std_dev, 1.0}});
  }

  /// Throws ConfigError mentioning `field` when the mixture is malformed.
  void validate(const std::string& field) const;

  double pdf(double x) const;
  double cdf(double x) const;
  double sample(std::mt19937_64& rng) const;

  const std::vector<GaussianComponent>& components() const { return components_; }
  bool empty() const { return components_.empty(); }

 private:
  std::vector<GaussianComponent> components_;
};

struct ScoreMixtureSpec {
  double pi_c = 0.0;
  double pi_s = 0.0;
  GaussianMixture1D in_density;
  GaussianMixture1D cov_density;
  GaussianMixture1D sem_density;
  int pool_size = 1000;
  int num_classes = 10;

  void validate() const;
  /// (1 - pi_c - pi_s) p_in + pi_c p_cov + pi_s p_sem
  double wild_pdf(double x) const;
  double wild_cdf(double x) const;
  /// Non-semantic weighted density minus semantic weighted density.
  double ambiguity_integrand(double x) const;
};

struct FeatureBlob {
  Eigen::VectorXd mean;
  double std_dev = 1.0;
};

struct FeatureMixtureSpec {
  double pi_c = 0.0;
  double pi_s = 0.0;
  int num_classes = 2;
  int dim = 2;
  // Row y-1 is the mean of class y.
  Eigen::MatrixXd class_means;
  double class_std = 1.0;
  // Per-class mean shift of the covariate component (same shape as class_means).
  Eigen::MatrixXd covariate_offset;
  // Covariate std = class_std * covariate_noise.
  double covariate_noise = 1.0;
  std::vector<FeatureBlob> semantic_blobs;
  int pool_size = 1000;
  int labeled_id_size = 500;
  int test_id_size = 1000;
  int test_covariate_size = 1000;
  int test_semantic_size = 1000;

  void validate() const;
};

/// Labeled feature data: X is n x d, labels in [1..K].
struct LabeledFeatures {
  Eigen::MatrixXd x;
  std::vector<int> labels;

  Eigen::Index size() const { return x.rows(); }
};

struct TestSplits {
  LabeledFeatures id;
  LabeledFeatures covariate;
  Eigen::MatrixXd semantic;
};

struct FeatureWild {
  LabeledFeatures labeled_id;
  WildPool pool;
  TestSplits tests;
};

WildPool sample_score_wild(const ScoreMixtureSpec& spec, std::uint64_t seed);

/// Draws `count` scores from the ID density (used as S_in scores in score mode).
std::vector<double> sample_id_scores(const ScoreMixtureSpec& spec, int count, std::uint64_t seed);

FeatureWild sample_feature_wild(const FeatureMixtureSpec& spec, std::uint64_t seed);

/// Simulated human: OOD for semantic examples, the hidden class otherwise.
HumanLabel oracle_label(const WildExample& example);

/// Fractions of (Id, Covariate, Semantic) membership.
Eigen::Vector3d membership_fractions(const WildPool& pool);

struct AmbiguityCurve {
  std::vector<double> grid;
  std::vector<double> cumulative;  // trapezoidal integral of the integrand
};

struct AnalyticThreshold {
  double lambda_star = 0.0;
  double grid_step = 0.0;
  double median = 0.0;
  AmbiguityCurve curve;
};

/// Grid argmax of the cumulative non-semantic minus semantic weighted density.
/// Near-ties (within 1e-9 of the maximum) resolve to the point closest to the
/// wild-mixture median.
AnalyticThreshold analytic_max_ambiguity(const ScoreMixtureSpec& spec, int grid_resolution);

/// Median of the full wild mixture, by bisection on its cdf.
double wild_median(const ScoreMixtureSpec& spec);

}  // namespace wildlabel

#endif  // WILDLABEL_WILDGEN_HPP
