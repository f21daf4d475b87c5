#include "wildlabel/learner.hpp"
#include "wildlabel/scores.hpp"
#include "wildlabel/wildgen.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wildlabel;

namespace {

Eigen::VectorXd logits(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("msp examples") {
  CHECK(msp_score(logits({0, 0})) == doctest::Approx(0.5));
  const double p = 1.0 / (1.0 + std::exp(-20.0));
  CHECK(msp_score(logits({10, -10})) == doctest::Approx(1.0 - p).epsilon(1e-6));
}

TEST_CASE("entropy examples") {
  CHECK(entropy_score(logits({0, 0, 0, 0})) == doctest::Approx(std::log(4.0)));
  CHECK(entropy_score(logits({100, 0, 0, 0})) == doctest::Approx(0.0).epsilon(1e-12));
  const double p = std::exp(1.0) / (1.0 + std::exp(1.0)), q = 1.0 - p;
  CHECK(entropy_score(logits({1, 0})) == doctest::Approx(-(p * std::log(p) + q * std::log(q))));
}

TEST_CASE("margin examples") {
  CHECK(margin_score(logits({2, 2, 2})) == doctest::Approx(0.0));
  CHECK(margin_score(logits({10, -10})) == doctest::Approx(-1.0).epsilon(1e-6));
  const double p = std::exp(1.0) / (1.0 + std::exp(1.0));
  CHECK(margin_score(logits({1, 0})) == doctest::Approx(-(p - (1.0 - p))));
}

TEST_CASE("energy examples and errors") {
  CHECK(energy_score(logits({0, 0})) == doctest::Approx(-std::log(2.0)));
  CHECK(energy_score(logits({3, 0})) == doctest::Approx(-std::log(std::exp(3.0) + 1.0)));
  CHECK_THROWS_AS(energy_score(logits({1, 0}), 0.0), ConfigError);
  CHECK_THROWS_AS(energy_score(logits({1})), InputError);
  CHECK_THROWS_AS(msp_score(logits({1, NAN})), InputError);
}

TEST_CASE("score kind names round-trip") {
  for (auto k : {ScoreKind::Msp, ScoreKind::Entropy, ScoreKind::Margin, ScoreKind::Energy})
    CHECK(parse_score_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_score_kind("gradnorm"), ConfigError);
}

TEST_CASE("property: shift invariance") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd l(5);
    for (auto& x : l) x = n(rng);
    const double c = n(rng) * 10.0;
    const Eigen::VectorXd s = (l.array() + c).matrix();
    CHECK(msp_score(s) == doctest::Approx(msp_score(l)).epsilon(1e-12));
    CHECK(entropy_score(s) == doctest::Approx(entropy_score(l)).epsilon(1e-12));
    CHECK(margin_score(s) == doctest::Approx(margin_score(l)).epsilon(1e-12));
    CHECK(std::abs(energy_score(s) - (energy_score(l) - c)) < 1e-12 * (1.0 + std::abs(c)) * 10);
  }
}

TEST_CASE("property: tempering toward uniform never lowers the OOD score") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd l(4);
    for (auto& x : l) x = n(rng);
    // Uniform logits at the mean level, so energy is comparable too.
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(4, l.mean());
    for (auto kind : {ScoreKind::Msp, ScoreKind::Entropy, ScoreKind::Margin, ScoreKind::Energy}) {
      double prev = ood_score(kind, l);
      for (double t = 0.1; t <= 1.0001; t += 0.1) {
        const Eigen::VectorXd mix = (1.0 - t) * l + t * u;
        const double cur = ood_score(kind, mix);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
      }
    }
  }
}

TEST_CASE("property: large logits stay finite") {
  const auto big = logits({1e4, -1e4, 5e3});
  for (auto kind : {ScoreKind::Msp, ScoreKind::Entropy, ScoreKind::Margin, ScoreKind::Energy})
    CHECK(std::isfinite(ood_score(kind, big)));
}

TEST_CASE("score_pool: msp range, purity, permutation equivariance") {
  FeatureMixtureSpec spec;
  spec.num_classes = 3;
  spec.dim = 2;
  spec.class_means.resize(3, 2);
  spec.class_means << -3, 0, 3, 0, 0, 3;
  spec.covariate_offset = Eigen::MatrixXd::Zero(1, 2);
  spec.pi_s = 0.2;
  spec.semantic_blobs.push_back({Eigen::Vector2d(0, -4), 1.0});
  spec.pool_size = 300;
  spec.labeled_id_size = 100;
  spec.test_id_size = spec.test_covariate_size = spec.test_semantic_size = 10;
  const auto fw = sample_feature_wild(spec, 4);

  ClassifierParams<double> f = ClassifierParams<double>::zeros(3, 2);
  f.weights << -1, 0.2, 1, 0.1, 0.3, 1;
  const auto a = score_pool(fw.pool, f, ScoreKind::Msp);
  const auto b = score_pool(fw.pool, f, ScoreKind::Msp);
  CHECK(a.scored);
  CHECK_FALSE(fw.pool.scored);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.examples[i].score >= 0.0);
    CHECK(a.examples[i].score <= 1.0 - 1.0 / 3.0 + 1e-12);
    CHECK(a.examples[i].score == b.examples[i].score);
  }

  // Reversed rows score to the reversed vector.
  const Eigen::MatrixXd rev = fw.pool.features.colwise().reverse();
  const Eigen::VectorXd fwd = ood_scores(ScoreKind::Energy, f.logits(fw.pool.features));
  const Eigen::VectorXd bwd = ood_scores(ScoreKind::Energy, f.logits(rev));
  CHECK((fwd.reverse() - bwd).cwiseAbs().maxCoeff() == 0.0);

  WildPool empty = fw.pool;
  empty.examples.clear();
  empty.features.resize(0, 2);
  CHECK(score_pool(empty, f, ScoreKind::Energy).empty());

  WildPool score_mode;
  score_mode.mode = PoolMode::Score;
  CHECK_THROWS_AS(score_pool(score_mode, f, ScoreKind::Msp), UsageError);
}
