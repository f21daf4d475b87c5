#include "wildlabel/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace wildlabel {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(sep, start), text.size());
    const auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
  return v;
}

long long parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(std::string(what) + ": expected an integer, got '" + std::string(text) + "'");
  return v;
}

FlatConfig FlatConfig::parse(std::string_view text) {
  FlatConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
    const auto key = trim(view.substr(0, eq));
    if (key.empty() || key.find('.') == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": key must look like section.key");
    cfg.values_[std::string(key)] = std::string(trim(view.substr(eq + 1)));
  }
  return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> FlatConfig::get(const std::string& key) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

long long FlatConfig::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
}

std::string FlatConfig::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigError("missing required key " + key);
  return *v;
}

std::vector<std::string> FlatConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.contains(k)) out.push_back(k);
  return out;
}

GaussianMixture1D parse_gaussian_mixture(std::string_view text, std::string_view what) {
  std::vector<GaussianComponent> comps;
  for (const auto& item : split_list(text, ',')) {
    const auto parts = split_list(item, ':');
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError(std::string(what) + ": component '" + item + "' must be mean:std[:weight]");
    comps.push_back({parse_double(parts[0], what), parse_double(parts[1], what),
                     parts.size() == 3 ? parse_double(parts[2], what) : 1.0});
  }
  if (comps.empty()) throw ConfigError(std::string(what) + ": empty mixture");
  return GaussianMixture1D(std::move(comps));
}

Eigen::MatrixXd parse_matrix(std::string_view text, std::string_view what) {
  std::vector<std::vector<double>> rows;
  for (const auto& row_text : split_list(text, ';')) {
    std::string normalized = row_text;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::vector<double> row;
    std::istringstream in(normalized);
    std::string tok;
    while (in >> tok) row.push_back(parse_double(tok, what));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError(std::string(what) + ": rows have different lengths");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw ConfigError("experiment.strategies must name at least one strategy");
  if (budgets.empty()) throw ConfigError("experiment.budgets must list at least one budget");
  if (seeds.empty()) throw ConfigError("experiment.seeds must list at least one seed");
  const int pool_size = mode == PoolMode::Score ? score_spec.pool_size : feature_spec.pool_size;
  for (auto s : strategies)
    for (int k : budgets) {
      validate_budget(s, k);
      if (k > pool_size)
        throw ConfigError("budget " + std::to_string(k) + " exceeds pool size " + std::to_string(pool_size));
    }
  if (mode == PoolMode::Score) {
    score_spec.validate();
    if (score_labeled_id_size <= 0) throw ConfigError("mixture.labeled_id_size must be > 0");
  } else {
    feature_spec.validate();
  }
  if (!(temperature > 0.0)) throw ConfigError("experiment.temperature must be > 0");
  if (histogram_bins != 0 && histogram_bins < 10) throw ConfigError("experiment.histogram_bins must be 0 or >= 10");
  train.validate();
  scoring_model.validate();
}

ExperimentConfig experiment_from_flat(const FlatConfig& flat) {
  ExperimentConfig cfg;
  const std::string mode = flat.get_string("experiment.mode", "score");
  if (mode == "score") cfg.mode = PoolMode::Score;
  else if (mode == "feature") cfg.mode = PoolMode::Feature;
  else throw ConfigError("experiment.mode must be score or feature, got '" + mode + "'");

  for (const auto& s : split_list(flat.require("experiment.strategies"))) cfg.strategies.push_back(parse_strategy(s));
  for (const auto& b : split_list(flat.require("experiment.budgets")))
    cfg.budgets.push_back(static_cast<int>(parse_int(b, "experiment.budgets")));
  for (const auto& s : split_list(flat.require("experiment.seeds"))) {
    const auto v = parse_int(s, "experiment.seeds");
    if (v < 0) throw ConfigError("experiment.seeds must be nonnegative");
    cfg.seeds.push_back(static_cast<std::uint64_t>(v));
  }
  cfg.master_seed = static_cast<std::uint64_t>(flat.get_int("experiment.master_seed", 0));
  cfg.score = parse_score_kind(flat.get_string("experiment.score", "energy"));
  cfg.temperature = flat.get_double("experiment.temperature", 1.0);
  cfg.window_rule = parse_window_rule(flat.get_string("experiment.window_rule", "literal"));
  cfg.output_dir = flat.get_string("experiment.output_dir", cfg.output_dir);
  cfg.histogram_bins = static_cast<int>(flat.get_int("experiment.histogram_bins", 0));

  const double pi_c = flat.get_double("mixture.pi_c", 0.0);
  const double pi_s = flat.get_double("mixture.pi_s", 0.0);
  const int pool_size = static_cast<int>(flat.get_int("mixture.pool_size", 1000));
  const int num_classes = static_cast<int>(flat.get_int("mixture.num_classes", cfg.mode == PoolMode::Score ? 10 : 2));
  const int labeled_id = static_cast<int>(flat.get_int("mixture.labeled_id_size", 1000));

  if (cfg.mode == PoolMode::Score) {
    auto& s = cfg.score_spec;
    s.pi_c = pi_c;
    s.pi_s = pi_s;
    s.pool_size = pool_size;
    s.num_classes = num_classes;
    if (auto v = flat.get("mixture.in")) s.in_density = parse_gaussian_mixture(*v, "mixture.in");
    if (auto v = flat.get("mixture.covariate")) s.cov_density = parse_gaussian_mixture(*v, "mixture.covariate");
    if (auto v = flat.get("mixture.semantic")) s.sem_density = parse_gaussian_mixture(*v, "mixture.semantic");
    cfg.score_labeled_id_size = labeled_id;
  } else {
    auto& f = cfg.feature_spec;
    f.pi_c = pi_c;
    f.pi_s = pi_s;
    f.pool_size = pool_size;
    f.num_classes = num_classes;
    f.labeled_id_size = labeled_id;
    f.class_means = parse_matrix(flat.require("mixture.class_means"), "mixture.class_means");
    f.dim = static_cast<int>(flat.get_int("mixture.dim", f.class_means.cols()));
    f.class_std = flat.get_double("mixture.class_std", 1.0);
    if (auto v = flat.get("mixture.covariate_offset")) f.covariate_offset = parse_matrix(*v, "mixture.covariate_offset");
    f.covariate_noise = flat.get_double("mixture.covariate_noise", 1.0);
    if (auto v = flat.get("mixture.semantic_blobs")) {
      for (const auto& blob : split_list(*v, ';')) {
        const auto parts = split_list(blob, ':');
        if (parts.size() != 2) throw ConfigError("mixture.semantic_blobs: each blob must be 'x y : std'");
        const Eigen::MatrixXd mean = parse_matrix(parts[0], "mixture.semantic_blobs");
        f.semantic_blobs.push_back({mean.row(0).transpose(), parse_double(parts[1], "mixture.semantic_blobs")});
      }
    }
    if (auto v = flat.get("mixture.test_sizes")) {
      const auto sizes = split_list(*v);
      if (sizes.size() != 3) throw ConfigError("mixture.test_sizes must list id, covariate, semantic sizes");
      f.test_id_size = static_cast<int>(parse_int(sizes[0], "mixture.test_sizes"));
      f.test_covariate_size = static_cast<int>(parse_int(sizes[1], "mixture.test_sizes"));
      f.test_semantic_size = static_cast<int>(parse_int(sizes[2], "mixture.test_sizes"));
    }
  }

  auto& t = cfg.train;
  t.alpha = flat.get_double("train.alpha", t.alpha);
  t.learning_rate = flat.get_double("train.lr", t.learning_rate);
  t.epochs = static_cast<int>(flat.get_int("train.epochs", t.epochs));
  t.batch_size = static_cast<int>(flat.get_int("train.batch_size", t.batch_size));
  t.hidden_width = static_cast<int>(flat.get_int("train.hidden_width", t.hidden_width));
  t.cosine_decay = flat.get_bool("train.cosine_decay", t.cosine_decay);
  cfg.detector_include_wild_id = flat.get_bool("train.detector_include_wild_id", false);

  auto& sm = cfg.scoring_model;
  sm.alpha = 0.0;
  sm.learning_rate = flat.get_double("scoring_model.lr", t.learning_rate);
  sm.epochs = static_cast<int>(flat.get_int("scoring_model.epochs", t.epochs));

  if (const auto unused = flat.unused_keys(); !unused.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_from_flat(FlatConfig::load(path));
}

}  // namespace wildlabel
