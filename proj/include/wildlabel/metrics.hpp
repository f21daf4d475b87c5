// Threshold-free and fixed-TPR detection metrics over OOD-oriented scores.
#ifndef WILDLABEL_METRICS_HPP
#define WILDLABEL_METRICS_HPP

#include <span>
#include <vector>

namespace wildlabel {

struct FprAtTpr {
  double fpr = 0.0;
  double threshold = 0.0;
};

/// Nearest-rank threshold on sorted ID scores: element ceil(tpr * n) (zero
/// based), so a `tpr` fraction lies strictly below it when scores are
/// distinct (OOD iff score >= threshold). For tpr = 1 the threshold sits just
/// above the maximum.
double id_percentile_threshold(std::span<const double> id_scores, double tpr);

/// FPR of semantic scores kept on the ID side (score < threshold) at the
/// threshold that keeps `tpr` of the ID scores.
FprAtTpr fpr_at_tpr(std::span<const double> id_scores, std::span<const double> sem_scores, double tpr = 0.95);

/// P(sem > id) + 0.5 P(sem == id), via midranks.
double auroc(std::span<const double> id_scores, std::span<const double> sem_scores);

/// Median (mean of the two middle values for even sizes) of a sorted range.
double sorted_median(std::span<const double> sorted);

}  // namespace wildlabel

#endif  // WILDLABEL_METRICS_HPP
