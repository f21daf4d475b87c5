#include "wildlabel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace wildlabel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum StreamTag : std::uint64_t { kPool = 0, kStrategy = 1, kTrain = 2, kIdScores = 3, kScoringModel = 4 };

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

}  // namespace

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

PreparedSeed prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  PreparedSeed out;
  out.seed = seed;
  const std::uint64_t pool_seed = derive_seed({cfg.master_seed, seed, kPool});
  if (cfg.mode == PoolMode::Score) {
    out.pool = sample_score_wild(cfg.score_spec, pool_seed);
    out.labeled_id_scores =
        sample_id_scores(cfg.score_spec, cfg.score_labeled_id_size, derive_seed({cfg.master_seed, seed, kIdScores}));
    return out;
  }
  FeatureWild fw = sample_feature_wild(cfg.feature_spec, pool_seed);
  TrainConfig scoring = cfg.scoring_model;
  scoring.seed = derive_seed({cfg.master_seed, seed, kScoringModel});
  const auto f0 = train_classifier(fw.labeled_id, cfg.feature_spec.num_classes, scoring);
  out.pool = score_pool(fw.pool, f0, cfg.score, cfg.temperature);
  const Eigen::VectorXd id_scores = ood_scores(cfg.score, f0.logits(fw.labeled_id.x), cfg.temperature);
  out.labeled_id_scores.assign(id_scores.data(), id_scores.data() + id_scores.size());
  out.features = std::move(fw);
  return out;
}

RunRow run_cell(const ExperimentConfig& cfg, const PreparedSeed& prepared, StrategyKind strategy, int budget) {
  const auto start = std::chrono::steady_clock::now();
  RunRow row;
  row.strategy = strategy;
  row.budget = budget;
  row.seed = prepared.seed;

  StrategyContext ctx;
  ctx.oracle = &oracle_label;
  ctx.labeled_id_scores = prepared.labeled_id_scores;
  ctx.seed = derive_seed({cfg.master_seed, prepared.seed, kStrategy, static_cast<std::uint64_t>(strategy),
                          static_cast<std::uint64_t>(budget)});
  ctx.window_rule = cfg.window_rule;
  SelectionResult sel = run_strategy(strategy, prepared.pool, budget, ctx);
  row.composition = sel.composition;
  row.mu_hat = sel.mu_hat;
  row.unspent = sel.unspent;
  row.trace = std::move(sel.trace);

  if (prepared.features) {
    const FeatureWild& fw = *prepared.features;
    const auto& s_in = fw.labeled_id;
    const Eigen::Index d = s_in.x.cols();
    std::vector<const LabeledEntry*> class_entries, ood_entries;
    for (const auto& e : sel.labeled.entries()) (e.label.is_ood() ? ood_entries : class_entries).push_back(&e);

    // Human labels cannot tell ID from covariate, so every non-OOD label
    // joins the classifier term.
    JointData<double> data;
    data.class_x.resize(s_in.size() + static_cast<Eigen::Index>(class_entries.size()), d);
    data.class_x.topRows(s_in.size()) = s_in.x;
    data.class_y = s_in.labels;
    for (std::size_t i = 0; i < class_entries.size(); ++i) {
      data.class_x.row(s_in.size() + static_cast<Eigen::Index>(i)) = fw.pool.feature_row(class_entries[i]->id);
      data.class_y.push_back(class_entries[i]->label.cls());
    }
    if (cfg.detector_include_wild_id) data.detector_id = data.class_x;
    else data.detector_id = s_in.x;
    data.detector_ood.resize(static_cast<Eigen::Index>(ood_entries.size()), d);
    for (std::size_t i = 0; i < ood_entries.size(); ++i)
      data.detector_ood.row(static_cast<Eigen::Index>(i)) = fw.pool.feature_row(ood_entries[i]->id);

    TrainConfig train = cfg.train;
    train.seed = derive_seed({cfg.master_seed, prepared.seed, kTrain, static_cast<std::uint64_t>(strategy),
                              static_cast<std::uint64_t>(budget)});
    TrainResult fit = train_joint(data, cfg.feature_spec.num_classes, train);
    row.loss_trace = std::move(fit.trace);
    row.warnings = std::move(fit.warnings);
    row.metrics = evaluate(fit.params.classifier, fit.params.detector, fw.tests);
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

bool RunReport::has_failures() const {
  return std::any_of(rows.begin(), rows.end(), [](const RunRow& r) { return r.error.has_value(); });
}

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  RunReport report;
  const std::size_t n_seeds = cfg.seeds.size();
  report.prepared.resize(n_seeds);
  std::vector<std::optional<std::string>> seed_errors(n_seeds);
  parallel_for(n_seeds, options.jobs, [&](std::size_t i) {
    try {
      report.prepared[i] = prepare_seed(cfg, cfg.seeds[i]);
    } catch (const std::exception& e) {
      seed_errors[i] = e.what();
    }
  });

  for (auto s : cfg.strategies)
    for (int k : cfg.budgets)
      for (std::size_t i = 0; i < n_seeds; ++i) {
        RunRow row;
        row.strategy = s;
        row.budget = k;
        row.seed = cfg.seeds[i];
        report.rows.push_back(std::move(row));
      }

  parallel_for(report.rows.size(), options.jobs, [&](std::size_t r) {
    RunRow& row = report.rows[r];
    const std::size_t seed_index = r % n_seeds;
    if (seed_errors[seed_index]) {
      row.error = "pool generation failed: " + *seed_errors[seed_index];
      return;
    }
    try {
      row = run_cell(cfg, report.prepared[seed_index], row.strategy, row.budget);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  report.aggregates = aggregate(report.rows, cfg);
  return report;
}

std::optional<Stat> summarize(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  Stat s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto n = static_cast<double>(values.size());
  s.mean = sum / n;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& rows, const ExperimentConfig& cfg) {
  std::vector<AggregateRow> out;
  for (auto s : cfg.strategies)
    for (int k : cfg.budgets) {
      AggregateRow agg;
      agg.strategy = s;
      agg.budget = k;
      std::vector<double> ood, id, fpr, au, nid, ncov, nsem, mu, unspent;
      for (const auto& r : rows) {
        if (r.strategy != s || r.budget != k || r.error) continue;
        ++agg.n_runs;
        if (r.metrics.ood_acc) ood.push_back(*r.metrics.ood_acc);
        if (r.metrics.id_acc) id.push_back(*r.metrics.id_acc);
        if (r.metrics.fpr95) fpr.push_back(*r.metrics.fpr95);
        if (r.metrics.auroc) au.push_back(*r.metrics.auroc);
        nid.push_back(r.composition.n_id);
        ncov.push_back(r.composition.n_covariate);
        nsem.push_back(r.composition.n_semantic);
        if (r.mu_hat) mu.push_back(*r.mu_hat);
        unspent.push_back(r.unspent);
      }
      agg.ood_acc = summarize(ood);
      agg.id_acc = summarize(id);
      agg.fpr95 = summarize(fpr);
      agg.auroc = summarize(au);
      agg.n_id = summarize(nid);
      agg.n_cov = summarize(ncov);
      agg.n_sem = summarize(nsem);
      agg.mu_hat = summarize(mu);
      agg.unspent = summarize(unspent);
      out.push_back(agg);
    }
  return out;
}

}  // namespace wildlabel
