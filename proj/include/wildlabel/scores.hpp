// OOD scores computed from classifier logits. Every score is oriented so
// that larger means "more likely semantic OOD".
#ifndef WILDLABEL_SCORES_HPP
#define WILDLABEL_SCORES_HPP

#include "wildlabel/core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <string_view>

namespace wildlabel {

enum class ScoreKind { Msp, Entropy, Margin, Energy };

ScoreKind parse_score_kind(std::string_view name);
std::string_view to_string(ScoreKind kind);

namespace detail {

template <typename Derived>
void check_logits(const Eigen::MatrixBase<Derived>& logits) {
  if (logits.size() < 2) throw InputError("logits need at least 2 classes");
  if (!logits.allFinite()) throw InputError("logits must be finite");
}

template <typename Derived>
auto softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = logits.maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p = (logits.derived().array() - top).exp().matrix();
  p /= p.sum();
  return p;
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  const auto top = v.maxCoeff();
  return top + std::log((v.derived().array() - top).exp().sum());
}

}  // namespace detail

/// 1 - max softmax probability.
template <typename Derived>
typename Derived::Scalar msp_score(const Eigen::MatrixBase<Derived>& logits) {
  detail::check_logits(logits);
  return typename Derived::Scalar(1) - detail::softmax(logits).maxCoeff();
}

/// Shannon entropy of the softmax, with 0 ln 0 = 0.
template <typename Derived>
typename Derived::Scalar entropy_score(const Eigen::MatrixBase<Derived>& logits) {
  detail::check_logits(logits);
  using Scalar = typename Derived::Scalar;
  const auto p = detail::softmax(logits);
  Scalar h(0);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > Scalar(0)) h -= p(i) * std::log(p(i));
  return h;
}

/// Negated gap between the two largest softmax probabilities; in [-1, 0].
template <typename Derived>
typename Derived::Scalar margin_score(const Eigen::MatrixBase<Derived>& logits) {
  detail::check_logits(logits);
  using Scalar = typename Derived::Scalar;
  const auto p = detail::softmax(logits);
  Scalar first = -1, second = -1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > first) {
      second = first;
      first = p(i);
    } else if (p(i) > second) {
      second = p(i);
    }
  }
  return -(first - second);
}

/// Energy -T log sum exp(l / T).
template <typename Derived>
typename Derived::Scalar energy_score(const Eigen::MatrixBase<Derived>& logits,
                                      typename Derived::Scalar temperature = 1) {
  if (!(temperature > 0)) throw ConfigError("energy temperature must be > 0");
  detail::check_logits(logits);
  return -temperature * detail::log_sum_exp((logits / temperature).eval());
}

template <typename Derived>
typename Derived::Scalar ood_score(ScoreKind kind, const Eigen::MatrixBase<Derived>& logits,
                                   typename Derived::Scalar temperature = 1) {
  switch (kind) {
    case ScoreKind::Msp: return msp_score(logits);
    case ScoreKind::Entropy: return entropy_score(logits);
    case ScoreKind::Margin: return margin_score(logits);
    case ScoreKind::Energy: return energy_score(logits, temperature);
  }
  throw UsageError("unknown score kind");
}

/// Scores every row of an n x K logit matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> ood_scores(
    ScoreKind kind, const Eigen::MatrixBase<Derived>& logits, typename Derived::Scalar temperature = 1) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    out(i) = ood_score(kind, logits.row(i).transpose(), temperature);
  return out;
}

template <typename Scalar>
struct ClassifierParams;

/// Copy of a feature-mode pool with every score filled by `kind` applied to
/// the classifier's logits.
WildPool score_pool(const WildPool& pool, const ClassifierParams<double>& classifier, ScoreKind kind,
                    double temperature = 1.0);

}  // namespace wildlabel

#endif  // WILDLABEL_SCORES_HPP
