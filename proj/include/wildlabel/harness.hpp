// Experiment orchestration: seeded cells over (strategy, budget, seed),
// aggregation, and report files.
#ifndef WILDLABEL_HARNESS_HPP
#define WILDLABEL_HARNESS_HPP

#include "wildlabel/config.hpp"

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace wildlabel {

/// splitmix64-based derivation of independent stream seeds.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// Everything a cell needs that depends only on the pool seed.
struct PreparedSeed {
  std::uint64_t seed = 0;
  WildPool pool;  // scored
  std::vector<double> labeled_id_scores;
  std::optional<FeatureWild> features;  // feature mode only (unscored pool inside)
};

PreparedSeed prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed);

struct RunRow {
  StrategyKind strategy = StrategyKind::Aha;
  int budget = 0;
  std::uint64_t seed = 0;
  Composition composition;
  MetricsReport metrics;
  std::optional<double> mu_hat;
  int unspent = 0;
  double wall_seconds = 0.0;  // not written to report files
  std::optional<std::string> error;
  std::vector<TraceStep> trace;
  std::vector<LossRecord> loss_trace;
  std::vector<std::string> warnings;
};

struct Stat {
  double mean = 0.0;
  std::optional<double> std_error;  // needs >= 2 values
};

struct AggregateRow {
  StrategyKind strategy = StrategyKind::Aha;
  int budget = 0;
  int n_runs = 0;  // successful cells
  std::optional<Stat> ood_acc, id_acc, fpr95, auroc, n_id, n_cov, n_sem, mu_hat, unspent;
};

struct RunReport {
  std::vector<RunRow> rows;  // ordered by strategy, budget, seed as configured
  std::vector<AggregateRow> aggregates;
  std::vector<PreparedSeed> prepared;  // per configured seed; empty entry if generation failed

  bool has_failures() const;
};

struct RunOptions {
  int jobs = 1;
};

/// Runs one cell against an already prepared seed. Throws on failure.
RunRow run_cell(const ExperimentConfig& cfg, const PreparedSeed& prepared, StrategyKind strategy, int budget);

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Mean and standard error (sample sd / sqrt(n)) of the values.
std::optional<Stat> summarize(const std::vector<double>& values);

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& rows, const ExperimentConfig& cfg);

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(std::string_view name);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Writes runs.{csv,json} and aggregate.{csv,json} (plus failures.csv when
/// any cell failed). Returns the written paths.
std::vector<std::filesystem::path> emit_report(const RunReport& report, const std::filesystem::path& dir,
                                               ReportFormat format);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<int> id, covariate, semantic;
};

Histogram score_histogram(const WildPool& pool, int bins);

std::filesystem::path emit_histograms(const WildPool& pool, int bins, const std::filesystem::path& file);

/// Columnar pool dump: id, score (+ membership, classLabel with reveal_truth).
std::filesystem::path emit_pool(const WildPool& pool, bool reveal_truth, const std::filesystem::path& file);

std::filesystem::path emit_trace(const RunRow& row, const std::filesystem::path& file);
std::filesystem::path emit_loss_trace(const RunRow& row, const std::filesystem::path& file);

/// Write-temp-then-rename. Throws IoError naming the path.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace wildlabel

#endif  // WILDLABEL_HARNESS_HPP
