#include "wildlabel/strategies.hpp"

#include "wildlabel/metrics.hpp"
#include "wildlabel/wildgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>

namespace wildlabel {

StrategyKind parse_strategy(std::string_view name) {
  if (name == "aha") return StrategyKind::Aha;
  if (name == "topk") return StrategyKind::TopK;
  if (name == "boundary") return StrategyKind::Boundary;
  if (name == "most-cov") return StrategyKind::MostCovariate;
  if (name == "least-sem") return StrategyKind::LeastSemantic;
  if (name == "mixed") return StrategyKind::Mixed;
  if (name == "random") return StrategyKind::Random;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected aha|topk|boundary|most-cov|least-sem|mixed|random)");
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Aha: return "aha";
    case StrategyKind::TopK: return "topk";
    case StrategyKind::Boundary: return "boundary";
    case StrategyKind::MostCovariate: return "most-cov";
    case StrategyKind::LeastSemantic: return "least-sem";
    case StrategyKind::Mixed: return "mixed";
    case StrategyKind::Random: return "random";
  }
  return "?";
}

void validate_budget(StrategyKind kind, int k) {
  if (k <= 0) throw ConfigError("budget must be > 0, got " + std::to_string(k));
  if (kind == StrategyKind::Aha && k % 4 != 0)
    throw ConfigError("aha needs a budget divisible by 4, got " + std::to_string(k));
}

namespace {

void require_scored(const WildPool& pool) {
  if (!pool.scored) throw UsageError("pool has not been scored");
}

void require_budget(const WildPool& pool, int k) {
  if (k <= 0) throw ConfigError("budget must be > 0, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > pool.size())
    throw ConfigError("budget " + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
}

void label_one(const WildPool& pool, ExampleId id, const LabelOracle& oracle, SelectionResult& out) {
  const WildExample& ex = pool.examples[static_cast<std::size_t>(id)];
  out.labeled.insert(id, ex.score, oracle(ex));
  out.composition.add(ex.membership);
}

double score_of(const WildPool& pool, ExampleId id) { return pool.examples[static_cast<std::size_t>(id)].score; }

// Ids ordered by descending score, ascending id.
std::vector<ExampleId> by_score_desc(const WildPool& pool, std::vector<ExampleId> ids) {
  std::sort(ids.begin(), ids.end(), [&](ExampleId a, ExampleId b) {
    const double sa = score_of(pool, a), sb = score_of(pool, b);
    return sa > sb || (sa == sb && a < b);
  });
  return ids;
}

// Ids ordered by ascending score, ascending id.
std::vector<ExampleId> by_score_asc(const WildPool& pool, std::vector<ExampleId> ids) {
  std::sort(ids.begin(), ids.end(), [&](ExampleId a, ExampleId b) {
    const double sa = score_of(pool, a), sb = score_of(pool, b);
    return sa < sb || (sa == sb && a < b);
  });
  return ids;
}

template <typename Pred>
std::vector<ExampleId> ids_where(const WildPool& pool, Pred pred) {
  std::vector<ExampleId> out;
  for (const auto& ex : pool.examples)
    if (pred(ex)) out.push_back(ex.id);
  return out;
}

// Splits `total` between two sides with preferred shares, moving any deficit
// of one side onto the other.
std::pair<std::size_t, std::size_t> split_with_deficit(std::size_t want_a, std::size_t want_b, std::size_t avail_a,
                                                       std::size_t avail_b) {
  const std::size_t total = want_a + want_b;
  std::size_t a = std::min(want_a, avail_a);
  const std::size_t b = std::min(total - a, avail_b);
  a = std::min(total - b, avail_a);
  return {a, b};
}

}  // namespace

SelectionResult aha_select(const WildPool& pool, int k, const LabelOracle& oracle, std::uint64_t seed,
                           WindowRule rule) {
  require_scored(pool);
  validate_budget(StrategyKind::Aha, k);
  require_budget(pool, k);

  const ScoreIndex index(pool);
  Phase1Result phase1 = phase1_search(pool, index, k / 2, oracle, seed, rule);

  SelectionResult out;
  out.mu_hat = phase1.mu_hat;
  out.trace = std::move(phase1.trace);
  for (const auto& e : phase1.labeled.entries()) {
    out.labeled.insert(e.id, e.score, e.label);
    out.composition.add(pool.examples[static_cast<std::size_t>(e.id)].membership);
  }

  // Phase 2: walk outward from mu_hat in score order, skipping phase-1 labels.
  const double mu = phase1.mu_hat;
  const auto scores = index.sorted_scores();
  const auto split = static_cast<std::size_t>(std::upper_bound(scores.begin(), scores.end(), mu) - scores.begin());
  std::vector<std::size_t> below, above;  // positions, nearest first
  for (std::size_t p = split; p-- > 0;)
    if (!out.labeled.contains(index.id_at(p))) below.push_back(p);
  for (std::size_t p = split; p < scores.size(); ++p)
    if (!out.labeled.contains(index.id_at(p))) above.push_back(p);

  const auto rollover = static_cast<std::size_t>(phase1.unspent);
  const std::size_t want_top = static_cast<std::size_t>(k / 4) + rollover / 2;
  const std::size_t want_bottom = static_cast<std::size_t>(k / 4) + (rollover - rollover / 2);
  const auto [n_top, n_bottom] = split_with_deficit(want_top, want_bottom, below.size(), above.size());
  for (std::size_t i = 0; i < n_top; ++i) label_one(pool, index.id_at(below[i]), oracle, out);
  for (std::size_t i = 0; i < n_bottom; ++i) label_one(pool, index.id_at(above[i]), oracle, out);
  out.unspent = static_cast<int>(want_top + want_bottom - n_top - n_bottom);
  return out;
}

SelectionResult top_k_select(const WildPool& pool, int k, const LabelOracle& oracle) {
  require_scored(pool);
  require_budget(pool, k);
  const auto order = by_score_desc(pool, ids_where(pool, [](const WildExample&) { return true; }));
  SelectionResult out;
  for (int i = 0; i < k; ++i) label_one(pool, order[static_cast<std::size_t>(i)], oracle, out);
  return out;
}

SelectionResult near_boundary_select(const WildPool& pool, std::span<const double> labeled_id_scores, int k,
                                     const LabelOracle& oracle) {
  require_scored(pool);
  if (labeled_id_scores.empty()) throw InputError("near-boundary selection needs labeled ID scores");
  if (k <= 0 || static_cast<std::size_t>(k) > pool.size())
    throw ConfigError("near-boundary selection needs 0 < k <= pool size");
  const double lambda = id_percentile_threshold(labeled_id_scores, 0.95);

  auto nearest = [&](std::vector<ExampleId> ids) {
    std::sort(ids.begin(), ids.end(), [&](ExampleId a, ExampleId b) {
      const double da = std::abs(score_of(pool, a) - lambda), db = std::abs(score_of(pool, b) - lambda);
      return da < db || (da == db && a < b);
    });
    return ids;
  };
  const auto below = nearest(ids_where(pool, [&](const WildExample& ex) { return ex.score < lambda; }));
  const auto above = nearest(ids_where(pool, [&](const WildExample& ex) { return ex.score >= lambda; }));
  const auto half = static_cast<std::size_t>(k / 2);
  const auto [n_below, n_above] =
      split_with_deficit(half, static_cast<std::size_t>(k) - half, below.size(), above.size());

  SelectionResult out;
  for (std::size_t i = 0; i < n_below; ++i) label_one(pool, below[i], oracle, out);
  for (std::size_t i = 0; i < n_above; ++i) label_one(pool, above[i], oracle, out);
  return out;
}

SelectionResult oracle_region_select(const WildPool& pool, int k, const LabelOracle& oracle, OracleRegion mode) {
  require_scored(pool);
  require_budget(pool, k);

  auto most_covariate = [&] {
    double top = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& ex : pool.examples)
      if (ex.membership == Membership::Covariate) {
        top = std::max(top, ex.score);
        any = true;
      }
    if (!any) throw ConfigError("most-covariate region needs covariate examples in the pool");
    return by_score_desc(pool, ids_where(pool, [&](const WildExample& ex) { return ex.score <= top; }));
  };
  auto least_semantic = [&] {
    double bottom = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& ex : pool.examples)
      if (ex.membership == Membership::Semantic) {
        bottom = std::min(bottom, ex.score);
        any = true;
      }
    if (!any) throw ConfigError("least-semantic region needs semantic examples in the pool");
    return by_score_asc(pool, ids_where(pool, [&](const WildExample& ex) { return ex.score >= bottom; }));
  };

  SelectionResult out;
  if (mode != OracleRegion::Mixed) {
    const auto order = mode == OracleRegion::MostCovariate ? most_covariate() : least_semantic();
    const std::size_t n = std::min(order.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) label_one(pool, order[i], oracle, out);
    out.unspent = k - static_cast<int>(n);
    return out;
  }

  // Mixed: alternate between the two regions with quotas k/2 and k - k/2;
  // duplicates are skipped, and an exhausted side hands its quota over.
  const auto lists = std::array{most_covariate(), least_semantic()};
  std::array<std::size_t, 2> cursor{0, 0};
  std::array<int, 2> quota{k / 2, k - k / 2};
  auto next_unique = [&](int side) -> std::optional<ExampleId> {
    auto& c = cursor[static_cast<std::size_t>(side)];
    const auto& list = lists[static_cast<std::size_t>(side)];
    while (c < list.size() && out.labeled.contains(list[c])) ++c;
    if (c == list.size()) return std::nullopt;
    return list[c++];
  };
  std::array<bool, 2> exhausted{false, false};
  while (quota[0] + quota[1] > 0 && !(exhausted[0] && exhausted[1])) {
    for (int side = 0; side < 2; ++side) {
      auto& q = quota[static_cast<std::size_t>(side)];
      if (q == 0) continue;
      if (auto id = next_unique(side)) {
        label_one(pool, *id, oracle, out);
        --q;
      } else {
        exhausted[static_cast<std::size_t>(side)] = true;
        quota[static_cast<std::size_t>(1 - side)] += q;
        q = 0;
      }
    }
    if (exhausted[0] && quota[0] > 0) quota[0] = 0;
    if (exhausted[1] && quota[1] > 0) quota[1] = 0;
  }
  out.unspent = k - static_cast<int>(out.labeled.size());
  return out;
}

SelectionResult random_select(const WildPool& pool, int k, const LabelOracle& oracle, std::uint64_t seed) {
  require_scored(pool);
  require_budget(pool, k);
  std::vector<ExampleId> ids(pool.size());
  std::iota(ids.begin(), ids.end(), ExampleId{0});
  std::mt19937_64 rng(seed);
  SelectionResult out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, ids.size() - 1)(rng);
    std::swap(ids[i], ids[j]);
    label_one(pool, ids[i], oracle, out);
  }
  return out;
}

SelectionResult run_strategy(StrategyKind kind, const WildPool& pool, int k, const StrategyContext& ctx) {
  validate_budget(kind, k);
  const LabelOracle oracle = ctx.oracle ? ctx.oracle : LabelOracle(&oracle_label);
  switch (kind) {
    case StrategyKind::Aha: return aha_select(pool, k, oracle, ctx.seed, ctx.window_rule);
    case StrategyKind::TopK: return top_k_select(pool, k, oracle);
    case StrategyKind::Boundary: return near_boundary_select(pool, ctx.labeled_id_scores, k, oracle);
    case StrategyKind::MostCovariate: return oracle_region_select(pool, k, oracle, OracleRegion::MostCovariate);
    case StrategyKind::LeastSemantic: return oracle_region_select(pool, k, oracle, OracleRegion::LeastSemantic);
    case StrategyKind::Mixed: return oracle_region_select(pool, k, oracle, OracleRegion::Mixed);
    case StrategyKind::Random: return random_select(pool, k, oracle, ctx.seed);
  }
  throw UsageError("unknown strategy");
}

}  // namespace wildlabel
