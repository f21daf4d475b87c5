// Budgeted labeling strategies over a scored wild pool.
#ifndef WILDLABEL_STRATEGIES_HPP
#define WILDLABEL_STRATEGIES_HPP

#include "wildlabel/core.hpp"
#include "wildlabel/search.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace wildlabel {

struct SelectionResult {
  LabeledSet labeled;
  Composition composition;  // from hidden tags; evaluation only
  std::optional<double> mu_hat;
  int unspent = 0;
  std::vector<TraceStep> trace;  // AHA phase 1 only
};

enum class StrategyKind { Aha, TopK, Boundary, MostCovariate, LeastSemantic, Mixed, Random };

StrategyKind parse_strategy(std::string_view name);
std::string_view to_string(StrategyKind kind);

/// Two-phase AHA: k/2 noisy-binary-search labels, then k/4 on each side of
/// the estimated threshold (plus any phase-1 rollover).
SelectionResult aha_select(const WildPool& pool, int k, const LabelOracle& oracle, std::uint64_t seed,
                           WindowRule rule = WindowRule::Literal);

/// The k highest scores (ties: smaller id first).
SelectionResult top_k_select(const WildPool& pool, int k, const LabelOracle& oracle);

/// k/2 nearest below and k - k/2 nearest at-or-above the 95%-TPR threshold of
/// the labeled ID scores.
SelectionResult near_boundary_select(const WildPool& pool, std::span<const double> labeled_id_scores, int k,
                                     const LabelOracle& oracle);

enum class OracleRegion { MostCovariate, LeastSemantic, Mixed };

/// Regions defined by the hidden extremes of the covariate and semantic scores.
SelectionResult oracle_region_select(const WildPool& pool, int k, const LabelOracle& oracle, OracleRegion mode);

SelectionResult random_select(const WildPool& pool, int k, const LabelOracle& oracle, std::uint64_t seed);

struct StrategyContext {
  LabelOracle oracle;
  std::vector<double> labeled_id_scores;  // near-boundary only
  std::uint64_t seed = 0;
  WindowRule window_rule = WindowRule::Literal;
};

SelectionResult run_strategy(StrategyKind kind, const WildPool& pool, int k, const StrategyContext& ctx);

/// Budget constraints a strategy imposes (AHA needs k divisible by 4).
void validate_budget(StrategyKind kind, int k);

}  // namespace wildlabel

#endif  // WILDLABEL_STRATEGIES_HPP
