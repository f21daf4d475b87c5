#include "wildlabel/metrics.hpp"

#include "wildlabel/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace wildlabel {

double id_percentile_threshold(std::span<const double> id_scores, double tpr) {
  if (id_scores.empty()) throw InputError("id_percentile_threshold: empty ID score list");
  if (!(tpr > 0.0 && tpr <= 1.0)) throw InputError("tpr must lie in (0, 1]");
  std::vector<double> sorted(id_scores.begin(), id_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  // Zero-based nearest rank ceil(tpr * n): without ties exactly that many ID
  // scores lie strictly below the returned value.
  const auto rank = static_cast<std::size_t>(std::ceil(tpr * static_cast<double>(n) - 1e-9));
  if (rank >= n) return std::nextafter(sorted.back(), std::numeric_limits<double>::infinity());
  return sorted[rank];
}

FprAtTpr fpr_at_tpr(std::span<const double> id_scores, std::span<const double> sem_scores, double tpr) {
  if (id_scores.empty() || sem_scores.empty()) throw InputError("fpr_at_tpr: empty score list");
  FprAtTpr out;
  out.threshold = id_percentile_threshold(id_scores, tpr);
  const auto kept = std::count_if(sem_scores.begin(), sem_scores.end(), [&](double s) { return s < out.threshold; });
  out.fpr = static_cast<double>(kept) / static_cast<double>(sem_scores.size());
  return out;
}

double auroc(std::span<const double> id_scores, std::span<const double> sem_scores) {
  if (id_scores.empty() || sem_scores.empty()) throw InputError("auroc: empty score list");
  const std::size_t n_id = id_scores.size();
  const std::size_t n_sem = sem_scores.size();
  std::vector<std::pair<double, bool>> all;  // (score, is_sem)
  all.reserve(n_id + n_sem);
  for (double s : id_scores) all.emplace_back(s, false);
  for (double s : sem_scores) all.emplace_back(s, true);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  // Twice the midrank keeps the rank sum integral and exact.
  std::uint64_t rank_sum_x2 = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const std::size_t twice_midrank = (i + 1) + j;  // (i+1) + j = 2 * average rank of block
    for (std::size_t r = i; r < j; ++r)
      if (all[r].second) rank_sum_x2 += twice_midrank;
    i = j;
  }
  const std::uint64_t u_x2 = rank_sum_x2 - static_cast<std::uint64_t>(n_sem) * (n_sem + 1);
  // One rounding of an exact ratio.
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_sem) * static_cast<double>(n_id));
}

double sorted_median(std::span<const double> sorted) {
  if (sorted.empty()) throw InputError("median of an empty list");
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace wildlabel
