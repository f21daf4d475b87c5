#include "wildlabel/scores.hpp"

#include "wildlabel/learner.hpp"

namespace wildlabel {

ScoreKind parse_score_kind(std::string_view name) {
  if (name == "msp") return ScoreKind::Msp;
  if (name == "entropy") return ScoreKind::Entropy;
  if (name == "margin") return ScoreKind::Margin;
  if (name == "energy") return ScoreKind::Energy;
  throw ConfigError("unknown score '" + std::string(name) + "' (expected msp|entropy|margin|energy)");
}

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::Msp: return "msp";
    case ScoreKind::Entropy: return "entropy";
    case ScoreKind::Margin: return "margin";
    case ScoreKind::Energy: return "energy";
  }
  return "?";
}

WildPool score_pool(const WildPool& pool, const ClassifierParams<double>& classifier, ScoreKind kind,
                    double temperature) {
  if (pool.mode == PoolMode::Score) throw UsageError("score-space pools carry intrinsic scores");
  if (!pool.empty() && pool.features.cols() != classifier.dim())
    throw UsageError("classifier dimension does not match pool features");
  WildPool out = pool;
  if (!pool.empty()) {
    const Eigen::VectorXd scores = ood_scores(kind, classifier.logits(pool.features), temperature);
    for (std::size_t i = 0; i < out.size(); ++i) out.examples[i].score = scores(static_cast<Eigen::Index>(i));
  }
  out.scored = true;
  return out;
}

}  // namespace wildlabel
