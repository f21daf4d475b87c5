#include "oracles.hpp"
#include "wildlabel/learner.hpp"
#include "wildlabel/wildgen.hpp"

#include <doctest.h>

#include <array>

using namespace wildlabel;

namespace {

ScoreMixtureSpec score_spec(double pi_c, double pi_s, int n) {
  ScoreMixtureSpec s;
  s.pi_c = pi_c;
  s.pi_s = pi_s;
  s.in_density = GaussianMixture1D::single(0.0, 1.0);
  s.cov_density = GaussianMixture1D::single(1.0, 1.0);
  s.sem_density = GaussianMixture1D::single(3.0, 1.0);
  s.pool_size = n;
  s.num_classes = 5;
  return s;
}

std::array<int, 3> counts(const WildPool& pool) {
  std::array<int, 3> c{};
  for (const auto& e : pool.examples) ++c[static_cast<int>(e.membership)];
  return c;
}

FeatureMixtureSpec separable_spec() {
  FeatureMixtureSpec s;
  s.num_classes = 2;
  s.dim = 2;
  s.class_means.resize(2, 2);
  s.class_means << -3, 0, 3, 0;
  s.covariate_offset = Eigen::MatrixXd::Zero(1, 2);
  s.semantic_blobs.push_back({Eigen::Vector2d(0, 6), 1.0});
  s.pool_size = 500;
  s.labeled_id_size = 400;
  s.test_id_size = 1000;
  s.test_covariate_size = 1000;
  s.test_semantic_size = 1000;
  return s;
}

}  // namespace

TEST_CASE("degenerate score mixture tags every example ID") {
  const auto pool = sample_score_wild(score_spec(0, 0, 100), 1);
  CHECK(pool.size() == 100);
  CHECK(counts(pool)[0] == 100);
}

TEST_CASE("membership counts follow the mixture weights") {
  const auto pool = sample_score_wild(score_spec(0.5, 0.1, 10000), 42);
  const auto c = counts(pool);
  CHECK(std::abs(c[0] - 4000) <= 500);
  CHECK(std::abs(c[1] - 5000) <= 500);
  CHECK(std::abs(c[2] - 1000) <= 500);
}

TEST_CASE("score pools are deterministic and ids are positions") {
  const auto a = sample_score_wild(score_spec(0.2, 0.3, 2000), 9);
  const auto b = sample_score_wild(score_spec(0.2, 0.3, 2000), 9);
  const auto c = sample_score_wild(score_spec(0.2, 0.3, 2000), 10);
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.examples[i].id == static_cast<ExampleId>(i));
    CHECK(a.examples[i].score == b.examples[i].score);
    CHECK(a.examples[i].membership == b.examples[i].membership);
    CHECK(a.examples[i].label == b.examples[i].label);
    differs |= a.examples[i].score != c.examples[i].score;
  }
  CHECK(differs);
}

TEST_CASE("non-semantic examples carry a class in 1..K, semantic ones OOD") {
  const auto pool = sample_score_wild(score_spec(0.3, 0.3, 3000), 3);
  for (const auto& e : pool.examples) {
    if (e.membership == Membership::Semantic) {
      CHECK(e.label.is_ood());
    } else {
      CHECK(e.label.cls() >= 1);
      CHECK(e.label.cls() <= 5);
    }
  }
}

TEST_CASE("invalid score spec names the field") {
  auto s = score_spec(0.7, 0.5, 100);
  CHECK_THROWS_AS(sample_score_wild(s, 1), ConfigError);
  s = score_spec(-0.1, 0.2, 100);
  CHECK_THROWS_WITH_AS(sample_score_wild(s, 1), doctest::Contains("pi_c"), ConfigError);
  s = score_spec(0.1, 0.2, 100);
  s.sem_density = GaussianMixture1D({{3.0, 1.0, 0.4}, {4.0, 1.0, 0.4}});
  CHECK_THROWS_AS(sample_score_wild(s, 1), ConfigError);
}

TEST_CASE("mixture cdf matches numerically integrated pdf") {
  const GaussianMixture1D m({{0.0, 1.0, 0.3}, {2.0, 0.5, 0.7}});
  double acc = 0.0;
  const int steps = 115000;
  const double h = 11.5 / steps;
  for (int i = 0; i < steps; ++i) {
    const double x = -10.0 + i * h;
    acc += 0.5 * h * (m.pdf(x) + m.pdf(x + h));
  }
  CHECK(m.cdf(1.5) == doctest::Approx(acc).epsilon(1e-6));
}

TEST_CASE("oracle label follows the hidden tag") {
  WildExample sem{0, 1.0, Membership::Semantic, HumanLabel::ood()};
  CHECK(oracle_label(sem).is_ood());
  WildExample cov{1, 1.0, Membership::Covariate, HumanLabel::of_class(3)};
  CHECK(oracle_label(cov).cls() == 3);
  WildExample id{2, 1.0, Membership::Id, HumanLabel::of_class(1)};
  CHECK(oracle_label(id).cls() == 1);
}

TEST_CASE("separable feature mixture: midline classifier is near perfect") {
  auto spec = separable_spec();
  const auto fw = sample_feature_wild(spec, 5);
  ClassifierParams<double> midline = ClassifierParams<double>::zeros(2, 2);
  midline.weights(0, 0) = -1.0;
  midline.weights(1, 0) = 1.0;
  const auto pred = classify_rows(midline, fw.labeled_id.x);
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == fw.labeled_id.labels[i];
  // Unit-variance blobs 3 sd from the midline: about 1 in 740 points crosses.
  CHECK(correct >= static_cast<int>(pred.size()) - 3);
}

TEST_CASE("feature mixture composition and split sizes") {
  auto spec = separable_spec();
  spec.pi_c = 0.4;
  spec.pi_s = 0.3;
  spec.pool_size = 5000;
  const auto fw = sample_feature_wild(spec, 8);
  const auto frac = membership_fractions(fw.pool);
  CHECK(std::abs(frac(0) - 0.3) < 0.03);
  CHECK(std::abs(frac(1) - 0.4) < 0.03);
  CHECK(std::abs(frac(2) - 0.3) < 0.03);
  CHECK(fw.pool.features.rows() == 5000);
  CHECK(fw.tests.id.size() == 1000);
  CHECK(fw.tests.covariate.size() == 1000);
  CHECK(fw.tests.semantic.rows() == 1000);
  CHECK(fw.labeled_id.size() == 400);
  CHECK_FALSE(fw.pool.scored);
}

TEST_CASE("feature spec validation") {
  auto spec = separable_spec();
  spec.num_classes = 1;
  spec.class_means = Eigen::MatrixXd::Zero(1, 2);
  CHECK_THROWS_AS(sample_feature_wild(spec, 1), ConfigError);
  spec = separable_spec();
  spec.pi_s = 0.2;
  spec.semantic_blobs.clear();
  CHECK_THROWS_AS(sample_feature_wild(spec, 1), ConfigError);
}

TEST_CASE("analytic threshold: symmetric crossing at 2") {
  ScoreMixtureSpec s = score_spec(0.0, 0.5, 100);
  s.sem_density = GaussianMixture1D::single(4.0, 1.0);
  const auto t = analytic_max_ambiguity(s, 20000);
  CHECK(std::abs(t.lambda_star - 2.0) <= 2 * t.grid_step);
}

TEST_CASE("analytic threshold: 0.7/0.3 crossing matches the closed form") {
  const auto t = analytic_max_ambiguity(score_spec(0.0, 0.3, 100), 20000);
  CHECK(std::abs(t.lambda_star - oracle::gaussian_crossing_07_03()) <= 2 * t.grid_step);
}

TEST_CASE("analytic threshold with no semantic mass picks the support edge") {
  const auto t = analytic_max_ambiguity(score_spec(0.3, 0.0, 100), 5000);
  const auto& f = t.curve.cumulative;
  for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i] >= f[i - 1] - 1e-15);
  const double top = *std::max_element(f.begin(), f.end());
  std::size_t first = 0;
  while (f[first] < top - 1e-9) ++first;
  CHECK(t.lambda_star == t.curve.grid[first]);
}

TEST_CASE("analytic threshold rejects tiny grids") {
  CHECK_THROWS_AS(analytic_max_ambiguity(score_spec(0.0, 0.3, 100), 10), ConfigError);
}

TEST_CASE("wild median splits the mixture mass") {
  const auto s = score_spec(0.2, 0.3, 100);
  CHECK(s.wild_cdf(wild_median(s)) == doctest::Approx(0.5).epsilon(1e-9));
}
