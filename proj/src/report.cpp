#include "wildlabel/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wildlabel {

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ConfigError("unknown report format '" + std::string(name) + "' (expected csv|json)");
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

nlohmann::json json_value(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

const char* const kRunColumns =
    "strategy,budget,seed,oodAcc,idAcc,fpr95,auroc,nId,nCov,nSem,muHat,unspent";

std::string runs_csv(const RunReport& report) {
  std::ostringstream out;
  out << kRunColumns << '\n';
  for (const auto& r : report.rows) {
    out << to_string(r.strategy) << ',' << r.budget << ',' << r.seed << ',';
    if (r.error) {
      // Failed cells keep the key columns only; details go to failures.csv.
      out << ",,,,,,,,\n";
      continue;
    }
    out << cell(r.metrics.ood_acc) << ',' << cell(r.metrics.id_acc) << ',' << cell(r.metrics.fpr95) << ','
        << cell(r.metrics.auroc) << ',' << r.composition.n_id << ',' << r.composition.n_covariate << ','
        << r.composition.n_semantic << ',' << cell(r.mu_hat) << ',' << r.unspent << '\n';
  }
  return out.str();
}

std::string aggregate_csv(const RunReport& report) {
  std::ostringstream out;
  out << "strategy,budget,runs";
  for (const char* name : {"oodAcc", "idAcc", "fpr95", "auroc", "nId", "nCov", "nSem", "muHat", "unspent"})
    out << ',' << name << "_mean," << name << "_se";
  out << '\n';
  for (const auto& a : report.aggregates) {
    out << to_string(a.strategy) << ',' << a.budget << ',' << a.n_runs;
    for (const auto* s : {&a.ood_acc, &a.id_acc, &a.fpr95, &a.auroc, &a.n_id, &a.n_cov, &a.n_sem, &a.mu_hat,
                          &a.unspent}) {
      out << ',' << (*s ? format_double((*s)->mean) : "") << ',';
      if (*s && (*s)->std_error) out << format_double(*(*s)->std_error);
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json runs_json(const RunReport& report) {
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j;
    j["strategy"] = std::string(to_string(r.strategy));
    j["budget"] = r.budget;
    j["seed"] = r.seed;
    if (r.error) {
      j["error"] = *r.error;
      rows.push_back(j);
      continue;
    }
    j["oodAcc"] = json_value(r.metrics.ood_acc);
    j["idAcc"] = json_value(r.metrics.id_acc);
    j["fpr95"] = json_value(r.metrics.fpr95);
    j["auroc"] = json_value(r.metrics.auroc);
    j["nId"] = r.composition.n_id;
    j["nCov"] = r.composition.n_covariate;
    j["nSem"] = r.composition.n_semantic;
    j["muHat"] = json_value(r.mu_hat);
    j["unspent"] = r.unspent;
    rows.push_back(j);
  }
  return rows;
}

nlohmann::json aggregate_json(const RunReport& report) {
  auto rows = nlohmann::json::array();
  auto stat = [](const std::optional<Stat>& s) -> nlohmann::json {
    if (!s) return nullptr;
    return {{"mean", s->mean}, {"se", s->std_error ? nlohmann::json(*s->std_error) : nlohmann::json(nullptr)}};
  };
  for (const auto& a : report.aggregates) {
    rows.push_back({{"strategy", std::string(to_string(a.strategy))},
                    {"budget", a.budget},
                    {"runs", a.n_runs},
                    {"oodAcc", stat(a.ood_acc)},
                    {"idAcc", stat(a.id_acc)},
                    {"fpr95", stat(a.fpr95)},
                    {"auroc", stat(a.auroc)},
                    {"nId", stat(a.n_id)},
                    {"nCov", stat(a.n_cov)},
                    {"nSem", stat(a.n_sem)},
                    {"muHat", stat(a.mu_hat)},
                    {"unspent", stat(a.unspent)}});
  }
  return rows;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const RunReport& report, const std::filesystem::path& dir,
                                               ReportFormat format) {
  if (report.rows.empty()) throw UsageError("cannot emit an empty report");
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::Csv) {
    written.push_back(dir / "runs.csv");
    write_file_atomic(written.back(), runs_csv(report));
    written.push_back(dir / "aggregate.csv");
    write_file_atomic(written.back(), aggregate_csv(report));
  } else {
    written.push_back(dir / "runs.json");
    write_file_atomic(written.back(), runs_json(report).dump(2) + "\n");
    written.push_back(dir / "aggregate.json");
    write_file_atomic(written.back(), aggregate_json(report).dump(2) + "\n");
  }
  if (report.has_failures()) {
    std::ostringstream out;
    out << "strategy,budget,seed,error\n";
    for (const auto& r : report.rows) {
      if (!r.error) continue;
      std::string msg = *r.error;
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << to_string(r.strategy) << ',' << r.budget << ',' << r.seed << ',' << msg << '\n';
    }
    written.push_back(dir / "failures.csv");
    write_file_atomic(written.back(), out.str());
  }
  return written;
}

Histogram score_histogram(const WildPool& pool, int bins) {
  if (bins < 10) throw ConfigError("histograms need at least 10 bins");
  if (!pool.scored) throw UsageError("pool has not been scored");
  Histogram h;
  h.id.assign(static_cast<std::size_t>(bins), 0);
  h.covariate = h.id;
  h.semantic = h.id;
  double lo = 0.0, hi = 1.0;
  if (!pool.empty()) {
    const auto [mn, mx] = std::minmax_element(pool.examples.begin(), pool.examples.end(),
                                              [](const auto& a, const auto& b) { return a.score < b.score; });
    lo = mn->score;
    hi = mx->score;
    if (hi <= lo) hi = lo + 1.0;
  }
  const double width = (hi - lo) / bins;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + width * i;
  h.edges.back() = hi;
  for (const auto& ex : pool.examples) {
    auto b = static_cast<int>(std::floor((ex.score - lo) / width));
    b = std::clamp(b, 0, bins - 1);
    auto& counts = ex.membership == Membership::Id ? h.id : ex.membership == Membership::Covariate ? h.covariate
                                                                                                  : h.semantic;
    ++counts[static_cast<std::size_t>(b)];
  }
  return h;
}

std::filesystem::path emit_histograms(const WildPool& pool, int bins, const std::filesystem::path& file) {
  const Histogram h = score_histogram(pool, bins);
  std::ostringstream out;
  out << "binLow,binHigh,id,covariate,semantic\n";
  for (std::size_t b = 0; b < h.id.size(); ++b)
    out << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << h.id[b] << ','
        << h.covariate[b] << ',' << h.semantic[b] << '\n';
  write_file_atomic(file, out.str());
  return file;
}

std::filesystem::path emit_pool(const WildPool& pool, bool reveal_truth, const std::filesystem::path& file) {
  std::ostringstream out;
  out << "id,score";
  if (reveal_truth) out << ",membership,classLabel";
  out << '\n';
  for (const auto& ex : pool.examples) {
    out << ex.id << ',' << format_double(ex.score);
    if (reveal_truth) out << ',' << to_string(ex.membership) << ',' << to_string(ex.label);
    out << '\n';
  }
  write_file_atomic(file, out.str());
  return file;
}

std::filesystem::path emit_trace(const RunRow& row, const std::filesystem::path& file) {
  std::ostringstream out;
  for (const auto& s : row.trace) {
    nlohmann::json j{{"t", s.t},
                     {"id", s.drawn},
                     {"label", to_string(s.label)},
                     {"low", s.interval.low},
                     {"high", s.interval.high},
                     {"inInterval", s.in_interval}};
    out << j.dump() << '\n';
  }
  write_file_atomic(file, out.str());
  return file;
}

std::filesystem::path emit_loss_trace(const RunRow& row, const std::filesystem::path& file) {
  std::ostringstream out;
  out << "epoch,ceLoss,detectorLoss,total\n";
  for (const auto& r : row.loss_trace)
    out << r.epoch << ',' << format_double(r.ce) << ',' << format_double(r.detector) << ','
        << format_double(r.total) << '\n';
  write_file_atomic(file, out.str());
  return file;
}

}  // namespace wildlabel
