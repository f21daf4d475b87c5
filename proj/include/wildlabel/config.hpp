// Flat `section.key = value` configuration files and the experiment config
// built from them.
#ifndef WILDLABEL_CONFIG_HPP
#define WILDLABEL_CONFIG_HPP

#include "wildlabel/learner.hpp"
#include "wildlabel/scores.hpp"
#include "wildlabel/search.hpp"
#include "wildlabel/strategies.hpp"
#include "wildlabel/wildgen.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wildlabel {

/// Key/value store for flat configs. `#` starts a comment; blank lines are
/// ignored; later keys override earlier ones. Lookups are recorded so
/// unknown (never consumed) keys can be reported.
class FlatConfig {
 public:
  static FlatConfig parse(std::string_view text);
  static FlatConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string require(const std::string& key) const;

  /// Keys present in the file that no lookup touched.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// "a, b, c" -> {"a", "b", "c"}; empty items are dropped.
std::vector<std::string> split_list(std::string_view text, char sep = ',');
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

/// "mean:std:weight, mean:std:weight" (weight defaults to 1 for one component).
GaussianMixture1D parse_gaussian_mixture(std::string_view text, std::string_view what);
/// Rows separated by ';', entries by whitespace or ','.
Eigen::MatrixXd parse_matrix(std::string_view text, std::string_view what);

struct ExperimentConfig {
  PoolMode mode = PoolMode::Score;
  ScoreMixtureSpec score_spec;
  FeatureMixtureSpec feature_spec;
  int score_labeled_id_size = 1000;  // S_in size in score mode (near-boundary threshold)

  std::vector<StrategyKind> strategies;
  std::vector<int> budgets;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;

  ScoreKind score = ScoreKind::Energy;
  double temperature = 1.0;
  WindowRule window_rule = WindowRule::Literal;

  TrainConfig train;
  TrainConfig scoring_model;  // CE-only fit on S_in that produces the wild scores
  bool detector_include_wild_id = false;

  std::string output_dir = "wildlabel_out";
  int histogram_bins = 0;  // 0 disables histogram output

  void validate() const;
};

ExperimentConfig experiment_from_flat(const FlatConfig& flat);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace wildlabel

#endif  // WILDLABEL_CONFIG_HPP
