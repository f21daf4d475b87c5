#include "wildlabel/search.hpp"

#include "wildlabel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

namespace wildlabel {

void LabeledSet::insert(ExampleId id, double score, HumanLabel label) {
  if (!ids_.insert(id).second) throw InputError("example " + std::to_string(id) + " is already labeled");
  const LabeledEntry entry{id, score, label};
  auto at = std::upper_bound(entries_.begin(), entries_.end(), entry, [](const auto& a, const auto& b) {
    return a.score < b.score || (a.score == b.score && a.id < b.id);
  });
  entries_.insert(at, entry);
}

ShrinkFactor::ShrinkFactor(std::size_t pool_size, int budget) : pool_size_(pool_size), budget_(budget) {
  if (pool_size < 2) throw ConfigError("shrink factor needs a pool of at least 2 examples");
  if (budget < 2) throw ConfigError("shrink factor needs a budget of at least 2");
  c_ = std::pow(static_cast<double>(pool_size), 2.0 / static_cast<double>(budget));
}

std::size_t ShrinkFactor::window_width(int step) const {
  const double target = static_cast<double>(pool_size_) / std::pow(c_, step);
  // The epsilon absorbs pow() rounding at exact powers (N / c^(k/2) = 1).
  const double w = std::floor(target + 1e-9);
  return w < 1.0 ? 1 : static_cast<std::size_t>(w);
}

ScoreIndex::ScoreIndex(const WildPool& pool) {
  if (!pool.scored) throw UsageError("pool has not been scored");
  const std::size_t n = pool.size();
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), ExampleId{0});
  for (std::size_t i = 0; i < n; ++i)
    if (pool.examples[i].id != static_cast<ExampleId>(i)) throw InputError("pool ids must equal their positions");
  std::sort(order_.begin(), order_.end(), [&](ExampleId a, ExampleId b) {
    const double sa = pool.examples[static_cast<std::size_t>(a)].score;
    const double sb = pool.examples[static_cast<std::size_t>(b)].score;
    return sa < sb || (sa == sb && a < b);
  });
  scores_.resize(n);
  position_.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto id = static_cast<std::size_t>(order_[p]);
    scores_[p] = pool.examples[id].score;
    position_[id] = p;
  }
}

std::pair<std::size_t, std::size_t> ScoreIndex::range(const ConfInterval& interval) const {
  const auto first = std::lower_bound(scores_.begin(), scores_.end(), interval.low);
  const auto last = std::upper_bound(first, scores_.end(), interval.high);
  return {static_cast<std::size_t>(first - scores_.begin()), static_cast<std::size_t>(last - scores_.begin())};
}

std::vector<double> argmax_candidates(const LabeledSet& labeled) {
  std::vector<double> out;
  const auto entries = labeled.entries();
  if (entries.empty()) return out;
  out.push_back(std::nextafter(entries.front().score, -std::numeric_limits<double>::infinity()));
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].score != entries[i - 1].score) out.push_back(0.5 * (entries[i - 1].score + entries[i].score));
  out.push_back(std::nextafter(entries.back().score, std::numeric_limits<double>::infinity()));
  return out;
}

ArgmaxResult empirical_argmax(const LabeledSet& labeled, std::span<const double> sorted_wild_scores) {
  if (!std::is_sorted(sorted_wild_scores.begin(), sorted_wild_scores.end()))
    throw std::logic_error("empirical_argmax: wild scores must be sorted ascending");
  if (labeled.empty()) return {sorted_median(sorted_wild_scores), 0};
  const double median = sorted_wild_scores.empty() ? 0.0 : sorted_median(sorted_wild_scores);

  const auto entries = labeled.entries();
  const auto candidates = argmax_candidates(labeled);
  ArgmaxResult best{candidates.front(), 0};
  double best_dist = std::abs(best.mu_hat - median);
  // Candidate c (c >= 1) sits right after the c-th block of equal labeled scores.
  long running = 0;
  std::size_t e = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double score = entries[e].score;
    for (; e < entries.size() && entries[e].score == score; ++e) running += entries[e].label.is_ood() ? -1 : 1;
    const double dist = std::abs(candidates[c] - median);
    if (running > best.value || (running == best.value && dist < best_dist)) {
      best = {candidates[c], running};
      best_dist = dist;
    }
  }
  return best;
}

WindowRule parse_window_rule(std::string_view name) {
  if (name == "keep-max") return WindowRule::KeepMax;
  if (name == "literal") return WindowRule::Literal;
  throw ConfigError("unknown window rule '" + std::string(name) + "' (expected keep-max|literal)");
}

std::string_view to_string(WindowRule rule) {
  return rule == WindowRule::KeepMax ? "keep-max" : "literal";
}

std::optional<ConfInterval> conf_update(const LabeledSet& labeled, const ScoreIndex& index,
                                        const ConfInterval& interval, std::size_t width, WindowRule rule) {
  const auto [first, last] = index.range(interval);
  const std::size_t m = last - first;
  if (m == 0) return std::nullopt;
  if (width == 0) width = 1;
  if (width >= m) return interval;

  // prefix[s] = L(s) for the s-th in-interval example (1-based), prefix[0] = 0.
  std::vector<long> step(m + 1, 0);
  for (const auto& e : labeled.entries()) {
    const std::size_t pos = index.position_of(e.id);
    if (pos >= first && pos < last) step[pos - first + 1] = e.label.is_ood() ? -1 : 1;
  }
  std::partial_sum(step.begin(), step.end(), step.begin());

  std::size_t best_i = 0;
  long best_key = 0;
  long best_center = 0;
  const long twice_mid = static_cast<long>(m) + 1;  // 2 * (1 + m) / 2
  for (std::size_t i = 1; i + width <= m; ++i) {
    const std::size_t j = i + width;
    const long key = rule == WindowRule::KeepMax ? std::min(step[i], step[j]) : -std::max(step[i], step[j]);
    const long center = std::labs(static_cast<long>(i + j) - twice_mid);
    if (best_i == 0 || key > best_key || (key == best_key && center < best_center)) {
      best_i = i;
      best_key = key;
      best_center = center;
    }
  }
  const auto scores = index.sorted_scores();
  return ConfInterval{scores[first + best_i - 1], scores[first + best_i + width - 1]};
}

std::optional<ConfInterval> conf_update(const LabeledSet& labeled, const ScoreIndex& index,
                                        const ConfInterval& interval, const ShrinkFactor& c, int step,
                                        WindowRule rule) {
  return conf_update(labeled, index, interval, c.window_width(step), rule);
}

Phase1Result phase1_search(const WildPool& pool, const ScoreIndex& index, int budget_half, const LabelOracle& oracle,
                           std::uint64_t seed, WindowRule rule) {
  if (budget_half <= 0) throw ConfigError("phase-1 budget must be >= 1");
  if (static_cast<std::size_t>(budget_half) > pool.size())
    throw ConfigError("phase-1 budget exceeds the pool size");
  const ShrinkFactor shrink(pool.size(), 2 * budget_half);
  std::mt19937_64 rng(seed);

  Phase1Result out;
  std::vector<char> taken(pool.size(), 0);  // by position
  std::vector<std::size_t> candidates;
  ConfInterval interval;
  for (int t = 1; t <= budget_half; ++t) {
    const auto [first, last] = index.range(interval);
    candidates.clear();
    for (std::size_t p = first; p < last; ++p)
      if (!taken[p]) candidates.push_back(p);
    if (candidates.empty()) {
      out.unspent = budget_half - (t - 1);
      break;
    }
    const std::size_t pos = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    taken[pos] = 1;
    const ExampleId id = index.id_at(pos);
    const WildExample& ex = pool.examples[static_cast<std::size_t>(id)];
    const HumanLabel label = oracle(ex);
    out.labeled.insert(id, ex.score, label);

    interval = *conf_update(out.labeled, index, interval, shrink, t, rule);
    const auto [a, b] = index.range(interval);
    out.trace.push_back({t, id, label, interval, b - a});
  }
  const auto best = empirical_argmax(out.labeled, index.sorted_scores());
  out.mu_hat = best.mu_hat;
  out.objective = best.value;
  return out;
}

}  // namespace wildlabel
