// Noisy binary search for the maximum-ambiguity threshold: the finite-sample
// objective, the confidence-interval shrink, and the phase-1 labeling loop.
#ifndef WILDLABEL_SEARCH_HPP
#define WILDLABEL_SEARCH_HPP

#include "wildlabel/core.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace wildlabel {

using LabelOracle = std::function<HumanLabel(const WildExample&)>;

struct LabeledEntry {
  ExampleId id = 0;
  double score = 0.0;
  HumanLabel label;
};

/// S_human: entries kept sorted by (score, id), ids unique.
class LabeledSet {
 public:
  /// Throws InputError on a duplicate id.
  void insert(ExampleId id, double score, HumanLabel label);
  bool contains(ExampleId id) const { return ids_.contains(id); }

  std::span<const LabeledEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<LabeledEntry> entries_;
  std::unordered_set<ExampleId> ids_;
};

struct ConfInterval {
  double low = -std::numeric_limits<double>::infinity();
  double high = std::numeric_limits<double>::infinity();

  bool contains(double s) const { return low <= s && s <= high; }
  bool within(const ConfInterval& outer) const { return outer.low <= low && high <= outer.high; }
};

/// c = N^(2/k): per-update shrink factor so that k/2 updates take N examples
/// down to a single window step.
class ShrinkFactor {
 public:
  ShrinkFactor(std::size_t pool_size, int budget);

  double value() const { return c_; }
  std::size_t pool_size() const { return pool_size_; }
  int budget() const { return budget_; }

  /// Window width J - I after `step` updates: max(1, floor(N / c^step)).
  std::size_t window_width(int step) const;

 private:
  std::size_t pool_size_;
  int budget_;
  double c_;
};

/// Pool positions sorted by (score, id) with the inverse lookup.
class ScoreIndex {
 public:
  explicit ScoreIndex(const WildPool& pool);

  std::span<const double> sorted_scores() const { return scores_; }
  ExampleId id_at(std::size_t pos) const { return order_[pos]; }
  std::size_t position_of(ExampleId id) const { return position_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return order_.size(); }

  /// Half-open position range [first, last) of examples with score in the interval.
  std::pair<std::size_t, std::size_t> range(const ConfInterval& interval) const;

 private:
  std::vector<ExampleId> order_;
  std::vector<double> scores_;
  std::vector<std::size_t> position_;
};

struct ArgmaxResult {
  double mu_hat = 0.0;
  long value = 0;
};

/// Candidate thresholds for the labeled objective: one just below the
/// smallest labeled score, midpoints between consecutive distinct labeled
/// scores, one just above the largest.
std::vector<double> argmax_candidates(const LabeledSet& labeled);

/// Maximizer of #(non-OOD with score <= s) - #(OOD with score <= s) over the
/// candidates; ties go to the candidate closest to the median of
/// `sorted_wild_scores` (then the smaller one). Empty set -> (median, 0).
ArgmaxResult empirical_argmax(const LabeledSet& labeled, std::span<const double> sorted_wild_scores);

enum class WindowRule {
  KeepMax,  // maximize min(L(i), L(j)): the window keeps the empirical maximizer
  Literal,  // minimize max(L(i), L(j)), as the shrink rule is written
};

WindowRule parse_window_rule(std::string_view name);
std::string_view to_string(WindowRule rule);

/// Shrinks `interval` to a window of `width` steps (width + 1 examples) over
/// the in-interval pool order. Returns nullopt when the interval holds no
/// examples; returns the interval unchanged when width >= m.
std::optional<ConfInterval> conf_update(const LabeledSet& labeled, const ScoreIndex& index,
                                        const ConfInterval& interval, std::size_t width,
                                        WindowRule rule = WindowRule::Literal);

/// Same, with the width taken from the shrink schedule at update `step` (1-based).
std::optional<ConfInterval> conf_update(const LabeledSet& labeled, const ScoreIndex& index,
                                        const ConfInterval& interval, const ShrinkFactor& c, int step,
                                        WindowRule rule = WindowRule::Literal);

struct TraceStep {
  int t = 0;
  ExampleId drawn = 0;
  HumanLabel label;
  ConfInterval interval;  // after the update
  std::size_t in_interval = 0;
};

struct Phase1Result {
  double mu_hat = 0.0;
  long objective = 0;
  LabeledSet labeled;
  std::vector<TraceStep> trace;
  int unspent = 0;
};

/// Draws uniformly from unlabeled in-interval examples, labels, shrinks;
/// `budget_half` rounds unless the interval runs dry. The shrink factor
/// uses the total budget 2 * budget_half.
Phase1Result phase1_search(const WildPool& pool, const ScoreIndex& index, int budget_half, const LabelOracle& oracle,
                           std::uint64_t seed, WindowRule rule = WindowRule::Literal);

}  // namespace wildlabel

#endif  // WILDLABEL_SEARCH_HPP
