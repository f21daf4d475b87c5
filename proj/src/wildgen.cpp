#include "wildlabel/wildgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace wildlabel {

std::string_view to_string(Membership m) {
  switch (m) {
    case Membership::Id: return "id";
    case Membership::Covariate: return "covariate";
    case Membership::Semantic: return "semantic";
  }
  return "?";
}

std::string to_string(HumanLabel label) {
  return label.is_ood() ? std::string("OOD") : std::to_string(label.cls());
}

void Composition::add(Membership m) {
  switch (m) {
    case Membership::Id: ++n_id; break;
    case Membership::Covariate: ++n_covariate; break;
    case Membership::Semantic: ++n_semantic; break;
  }
}

namespace {

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

void check_priors(double pi_c, double pi_s) {
  if (!(pi_c >= 0.0 && pi_c <= 1.0)) throw ConfigError("pi_c must lie in [0,1], got " + std::to_string(pi_c));
  if (!(pi_s >= 0.0 && pi_s <= 1.0)) throw ConfigError("pi_s must lie in [0,1], got " + std::to_string(pi_s));
  if (pi_c + pi_s > 1.0 + 1e-12) throw ConfigError("pi_c + pi_s must not exceed 1");
}

Membership draw_membership(std::mt19937_64& rng, double pi_c, double pi_s) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double p_id = 1.0 - pi_c - pi_s;
  if (u < p_id) return Membership::Id;
  if (u < p_id + pi_c) return Membership::Covariate;
  return Membership::Semantic;
}

// Binomial 5-point check for large pools; a warning, never an error.
void check_fractions(WildPool& pool, double pi_c, double pi_s) {
  if (pool.size() < 1000) return;
  const Eigen::Vector3d got = membership_fractions(pool);
  const Eigen::Vector3d want(1.0 - pi_c - pi_s, pi_c, pi_s);
  if ((got - want).cwiseAbs().maxCoeff() > 0.05) {
    std::ostringstream msg;
    msg << "membership fractions (" << got.transpose() << ") deviate from (" << want.transpose()
        << ") by more than 5 points";
    pool.warnings.push_back(msg.str());
  }
}

}  // namespace

GaussianMixture1D::GaussianMixture1D(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {}

void GaussianMixture1D::validate(const std::string& field) const {
  if (components_.empty()) throw ConfigError(field + ": mixture has no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!std::isfinite(c.mean)) throw ConfigError(field + ": component mean must be finite");
    if (!(c.std_dev > 0.0) || !std::isfinite(c.std_dev))
      throw ConfigError(field + ": component std_dev must be > 0");
    if (!(c.weight >= 0.0)) throw ConfigError(field + ": component weight must be nonnegative");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(field + ": component weights must sum to 1");
}

double GaussianMixture1D::pdf(double x) const {
  double p = 0.0;
  for (const auto& c : components_) p += c.weight * normal_pdf(x, c.mean, c.std_dev);
  return p;
}

double GaussianMixture1D::cdf(double x) const {
  double p = 0.0;
  for (const auto& c : components_) p += c.weight * normal_cdf(x, c.mean, c.std_dev);
  return p;
}

double GaussianMixture1D::sample(std::mt19937_64& rng) const {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const GaussianComponent* chosen = &components_.back();
  for (const auto& c : components_) {
    if (u < c.weight) {
      chosen = &c;
      break;
    }
    u -= c.weight;
  }
  return std::normal_distribution<double>(chosen->mean, chosen->std_dev)(rng);
}

void ScoreMixtureSpec::validate() const {
  check_priors(pi_c, pi_s);
  if (pool_size <= 0) throw ConfigError("pool_size must be > 0");
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (1.0 - pi_c - pi_s > 0.0) in_density.validate("in_density");
  if (pi_c > 0.0) cov_density.validate("cov_density");
  if (pi_s > 0.0) sem_density.validate("sem_density");
}

double ScoreMixtureSpec::wild_pdf(double x) const {
  double p = 0.0;
  if (1.0 - pi_c - pi_s > 0.0) p += (1.0 - pi_c - pi_s) * in_density.pdf(x);
  if (pi_c > 0.0) p += pi_c * cov_density.pdf(x);
  if (pi_s > 0.0) p += pi_s * sem_density.pdf(x);
  return p;
}

double ScoreMixtureSpec::wild_cdf(double x) const {
  double p = 0.0;
  if (1.0 - pi_c - pi_s > 0.0) p += (1.0 - pi_c - pi_s) * in_density.cdf(x);
  if (pi_c > 0.0) p += pi_c * cov_density.cdf(x);
  if (pi_s > 0.0) p += pi_s * sem_density.cdf(x);
  return p;
}

double ScoreMixtureSpec::ambiguity_integrand(double x) const {
  double p = 0.0;
  if (1.0 - pi_c - pi_s > 0.0) p += (1.0 - pi_c - pi_s) * in_density.pdf(x);
  if (pi_c > 0.0) p += pi_c * cov_density.pdf(x);
  if (pi_s > 0.0) p -= pi_s * sem_density.pdf(x);
  return p;
}

void FeatureMixtureSpec::validate() const {
  check_priors(pi_c, pi_s);
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2, got " + std::to_string(num_classes));
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (class_means.rows() != num_classes || class_means.cols() != dim)
    throw ConfigError("class_means must be num_classes x dim");
  if (covariate_offset.size() != 0 &&
      !((covariate_offset.rows() == num_classes || covariate_offset.rows() == 1) && covariate_offset.cols() == dim))
    throw ConfigError("covariate_offset must be 1 x dim or num_classes x dim");
  if (!(class_std > 0.0)) throw ConfigError("class_std must be > 0");
  if (!(covariate_noise > 0.0)) throw ConfigError("covariate_noise must be > 0");
  if (pi_s > 0.0 && semantic_blobs.empty()) throw ConfigError("semantic_blobs is empty but pi_s > 0");
  if (test_semantic_size > 0 && semantic_blobs.empty())
    throw ConfigError("semantic_blobs is empty but test_semantic_size > 0");
  for (const auto& b : semantic_blobs) {
    if (b.mean.size() != dim) throw ConfigError("semantic_blobs: mean dimension mismatch");
    if (!(b.std_dev > 0.0)) throw ConfigError("semantic_blobs: std_dev must be > 0");
  }
  if (pool_size <= 0) throw ConfigError("pool_size must be > 0");
  if (labeled_id_size <= 0) throw ConfigError("labeled_id_size must be > 0");
  if (test_id_size < 0 || test_covariate_size < 0 || test_semantic_size < 0)
    throw ConfigError("test split sizes must be >= 0");
}

WildPool sample_score_wild(const ScoreMixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> class_dist(1, spec.num_classes);

  WildPool pool;
  pool.mode = PoolMode::Score;
  pool.seed = seed;
  pool.num_classes = spec.num_classes;
  pool.scored = true;
  pool.features.resize(spec.pool_size, 0);
  pool.examples.reserve(static_cast<std::size_t>(spec.pool_size));
  for (int i = 0; i < spec.pool_size; ++i) {
    WildExample ex;
    ex.id = i;
    ex.membership = draw_membership(rng, spec.pi_c, spec.pi_s);
    switch (ex.membership) {
      case Membership::Id: ex.score = spec.in_density.sample(rng); break;
      case Membership::Covariate: ex.score = spec.cov_density.sample(rng); break;
      case Membership::Semantic: ex.score = spec.sem_density.sample(rng); break;
    }
    ex.label = ex.membership == Membership::Semantic ? HumanLabel::ood() : HumanLabel::of_class(class_dist(rng));
    pool.examples.push_back(ex);
  }
  check_fractions(pool, spec.pi_c, spec.pi_s);
  return pool;
}

std::vector<double> sample_id_scores(const ScoreMixtureSpec& spec, int count, std::uint64_t seed) {
  spec.in_density.validate("in_density");
  std::mt19937_64 rng(seed);
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& s : out) s = spec.in_density.sample(rng);
  return out;
}

namespace {

Eigen::VectorXd gaussian_point(std::mt19937_64& rng, const Eigen::VectorXd& mean, double sd) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorXd x(mean.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = mean(j) + sd * n01(rng);
  return x;
}

struct FeatureDraw {
  Eigen::VectorXd x;
  int cls = 0;  // 0 for semantic
};

FeatureDraw draw_component(const FeatureMixtureSpec& spec, Membership m, std::mt19937_64& rng) {
  if (m == Membership::Semantic) {
    std::uniform_int_distribution<std::size_t> pick(0, spec.semantic_blobs.size() - 1);
    const auto& blob = spec.semantic_blobs[pick(rng)];
    return {gaussian_point(rng, blob.mean, blob.std_dev), 0};
  }
  const int cls = std::uniform_int_distribution<int>(1, spec.num_classes)(rng);
  Eigen::VectorXd mean = spec.class_means.row(cls - 1).transpose();
  double sd = spec.class_std;
  if (m == Membership::Covariate) {
    if (spec.covariate_offset.rows() == 1) mean += spec.covariate_offset.row(0).transpose();
    else if (spec.covariate_offset.rows() > 0) mean += spec.covariate_offset.row(cls - 1).transpose();
    sd *= spec.covariate_noise;
  }
  return {gaussian_point(rng, mean, sd), cls};
}

LabeledFeatures draw_labeled(const FeatureMixtureSpec& spec, Membership m, int n, std::mt19937_64& rng) {
  LabeledFeatures out;
  out.x.resize(n, spec.dim);
  out.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto d = draw_component(spec, m, rng);
    out.x.row(i) = d.x.transpose();
    out.labels[static_cast<std::size_t>(i)] = d.cls;
  }
  return out;
}

}  // namespace

FeatureWild sample_feature_wild(const FeatureMixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  // Independent streams so changing one split size leaves the others intact.
  std::seed_seq seq_in{seed, std::uint64_t{1}}, seq_pool{seed, std::uint64_t{2}}, seq_test{seed, std::uint64_t{3}};
  std::mt19937_64 rng_in(seq_in), rng_pool(seq_pool), rng_test(seq_test);

  FeatureWild out;
  out.labeled_id = draw_labeled(spec, Membership::Id, spec.labeled_id_size, rng_in);

  WildPool& pool = out.pool;
  pool.mode = PoolMode::Feature;
  pool.seed = seed;
  pool.num_classes = spec.num_classes;
  pool.scored = false;
  pool.features.resize(spec.pool_size, spec.dim);
  pool.examples.reserve(static_cast<std::size_t>(spec.pool_size));
  for (int i = 0; i < spec.pool_size; ++i) {
    WildExample ex;
    ex.id = i;
    ex.membership = draw_membership(rng_pool, spec.pi_c, spec.pi_s);
    auto d = draw_component(spec, ex.membership, rng_pool);
    pool.features.row(i) = d.x.transpose();
    ex.label = d.cls == 0 ? HumanLabel::ood() : HumanLabel::of_class(d.cls);
    ex.score = std::numeric_limits<double>::quiet_NaN();
    pool.examples.push_back(ex);
  }
  check_fractions(pool, spec.pi_c, spec.pi_s);

  out.tests.id = draw_labeled(spec, Membership::Id, spec.test_id_size, rng_test);
  out.tests.covariate = draw_labeled(spec, Membership::Covariate, spec.test_covariate_size, rng_test);
  out.tests.semantic = draw_labeled(spec, Membership::Semantic, spec.test_semantic_size, rng_test).x;
  return out;
}

HumanLabel oracle_label(const WildExample& example) {
  return example.membership == Membership::Semantic ? HumanLabel::ood() : example.label;
}

Eigen::Vector3d membership_fractions(const WildPool& pool) {
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  for (const auto& ex : pool.examples) counts(static_cast<int>(ex.membership)) += 1.0;
  if (!pool.empty()) counts /= static_cast<double>(pool.size());
  return counts;
}

double wild_median(const ScoreMixtureSpec& spec) {
  double lo = -1.0, hi = 1.0;
  while (spec.wild_cdf(lo) > 0.5) lo *= 2.0;
  while (spec.wild_cdf(hi) < 0.5) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (spec.wild_cdf(mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

AnalyticThreshold analytic_max_ambiguity(const ScoreMixtureSpec& spec, int grid_resolution) {
  spec.validate();
  if (grid_resolution < 1000)
    throw ConfigError("grid_resolution must be >= 1000 to bracket the mixture, got " +
                      std::to_string(grid_resolution));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto extend = [&](const GaussianMixture1D& g, double weight) {
    if (weight <= 0.0) return;
    for (const auto& c : g.components()) {
      lo = std::min(lo, c.mean - 8.0 * c.std_dev);
      hi = std::max(hi, c.mean + 8.0 * c.std_dev);
    }
  };
  extend(spec.in_density, 1.0 - spec.pi_c - spec.pi_s);
  extend(spec.cov_density, spec.pi_c);
  extend(spec.sem_density, spec.pi_s);

  AnalyticThreshold out;
  const auto n = static_cast<std::size_t>(grid_resolution);
  out.grid_step = (hi - lo) / static_cast<double>(grid_resolution);
  out.curve.grid.resize(n + 1);
  out.curve.cumulative.resize(n + 1);
  double prev_f = spec.ambiguity_integrand(lo);
  out.curve.grid[0] = lo;
  out.curve.cumulative[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = lo + out.grid_step * static_cast<double>(i);
    const double f = spec.ambiguity_integrand(x);
    out.curve.grid[i] = x;
    out.curve.cumulative[i] = out.curve.cumulative[i - 1] + 0.5 * out.grid_step * (prev_f + f);
    prev_f = f;
  }

  const double best = *std::max_element(out.curve.cumulative.begin(), out.curve.cumulative.end());
  out.median = wild_median(spec);
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    if (out.curve.cumulative[i] < best - 1e-9) continue;
    const double dist = std::abs(out.curve.grid[i] - out.median);
    if (dist < best_dist) {
      best_dist = dist;
      out.lambda_star = out.curve.grid[i];
    }
  }
  return out;
}

}  // namespace wildlabel
