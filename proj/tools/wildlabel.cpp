// wildlabel: run labeling experiments from a flat config file.
#include "wildlabel/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCellFailure = 3;

struct RunFlags {
  std::string config;
  bool trace = false;
  bool reveal_truth = false;
  bool dump_pools = false;
  bool loss_trace = false;
  std::string format = "csv";
  int jobs = 1;
  // Overrides, applied to the flat config before it is interpreted.
  std::string score, temperature, strategy, alpha, epochs, lr, hidden_width, batch_size, window_rule, output;
  bool include_wild_id = false;
};

std::string cell_stem(const wildlabel::RunRow& row) {
  return std::string(wildlabel::to_string(row.strategy)) + "_k" + std::to_string(row.budget) + "_s" +
         std::to_string(row.seed);
}

int do_run(const RunFlags& f) {
  using namespace wildlabel;
  auto flat = FlatConfig::load(f.config);
  const std::pair<const std::string*, const char*> overrides[] = {
      {&f.score, "experiment.score"},    {&f.temperature, "experiment.temperature"},
      {&f.strategy, "experiment.strategies"}, {&f.window_rule, "experiment.window_rule"},
      {&f.output, "experiment.output_dir"},   {&f.alpha, "train.alpha"},
      {&f.epochs, "train.epochs"},       {&f.lr, "train.lr"},
      {&f.hidden_width, "train.hidden_width"}, {&f.batch_size, "train.batch_size"},
  };
  for (const auto& [value, key] : overrides)
    if (!value->empty()) flat.set(key, *value);
  if (f.include_wild_id) flat.set("train.detector_include_wild_id", "true");

  const ExperimentConfig cfg = experiment_from_flat(flat);
  const ReportFormat format = parse_report_format(f.format);
  if (f.jobs < 1) throw ConfigError("--jobs must be >= 1");
  cfg.validate();

  const RunReport report = run_experiment(cfg, {f.jobs});
  const std::filesystem::path out = cfg.output_dir;
  emit_report(report, out, format);

  for (const auto& row : report.rows) {
    for (const auto& w : row.warnings) std::cerr << "warning [" << cell_stem(row) << "]: " << w << '\n';
    if (row.error) std::cerr << "error [" << cell_stem(row) << "]: " << *row.error << '\n';
    else std::cerr << cell_stem(row) << ": " << row.wall_seconds << " s\n";
    if (row.error) continue;
    if (f.trace && !row.trace.empty()) emit_trace(row, out / "trace" / (cell_stem(row) + ".jsonl"));
    if (f.loss_trace && !row.loss_trace.empty()) emit_loss_trace(row, out / "loss" / (cell_stem(row) + ".csv"));
  }
  for (std::size_t i = 0; i < report.prepared.size(); ++i) {
    const auto& p = report.prepared[i];
    if (!p.pool.scored) continue;
    for (const auto& w : p.pool.warnings) std::cerr << "warning [seed " << p.seed << "]: " << w << '\n';
    const std::string seed = std::to_string(p.seed);
    if (f.dump_pools) emit_pool(p.pool, f.reveal_truth, out / "pools" / ("pool_s" + seed + ".csv"));
    if (cfg.histogram_bins > 0)
      emit_histograms(p.pool, cfg.histogram_bins, out / "histograms" / ("scores_s" + seed + ".csv"));
  }
  return report.has_failures() ? kExitCellFailure : 0;
}

int do_oracle_threshold(const std::string& path, int resolution) {
  using namespace wildlabel;
  const ExperimentConfig cfg = load_experiment_config(path);
  if (cfg.mode != PoolMode::Score) throw ConfigError("oracle-threshold needs experiment.mode = score");
  const AnalyticThreshold t = analytic_max_ambiguity(cfg.score_spec, resolution);
  std::cout << format_double(t.lambda_star) << '\n';
  std::cerr << "grid step " << t.grid_step << ", wild median " << t.median << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive human-assisted labeling experiments on synthetic wild mixtures"};
  app.require_subcommand(1);

  RunFlags f;
  auto* run = app.add_subcommand("run", "Run every (strategy, budget, seed) cell and write reports");
  run->add_option("--config", f.config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_flag("--trace", f.trace, "Write phase-1 search traces");
  run->add_flag("--reveal-truth", f.reveal_truth, "Include membership and class columns in pool dumps");
  run->add_flag("--dump-pools", f.dump_pools, "Write each scored pool");
  run->add_flag("--loss-trace", f.loss_trace, "Write per-epoch losses");
  run->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--jobs", f.jobs, "Worker threads");
  run->add_option("--score", f.score, "msp|entropy|margin|energy");
  run->add_option("--temperature", f.temperature, "Energy temperature");
  run->add_option("--strategy", f.strategy, "aha|topk|boundary|most-cov|least-sem|mixed|random (comma list)");
  run->add_option("--window-rule", f.window_rule, "literal|keep-max (default literal)");
  run->add_option("--alpha", f.alpha, "Detector loss weight");
  run->add_option("--epochs", f.epochs, "Training epochs");
  run->add_option("--lr", f.lr, "Learning rate");
  run->add_option("--hidden-width", f.hidden_width, "Detector hidden width (0 = linear)");
  run->add_option("--batch-size", f.batch_size, "Mini-batch size (0 = full batch)");
  run->add_flag("--detector-include-wild-id", f.include_wild_id, "Wild ID-labeled examples enter the detector");
  run->add_option("--output", f.output, "Output directory");

  std::string oracle_config;
  int resolution = 20000;
  auto* oracle = app.add_subcommand("oracle-threshold", "Print the analytic maximum-ambiguity threshold");
  oracle->add_option("--config", oracle_config, "Config file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--grid", resolution, "Grid resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return do_run(f);
    return do_oracle_threshold(oracle_config, resolution);
  } catch (const wildlabel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
