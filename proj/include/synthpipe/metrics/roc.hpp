#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "synthpipe/core/errors.hpp"

namespace synthpipe {

/// ROC curve plus its area. The curve starts at (0, 0) with threshold
/// +infinity and ends at (1, 1); points are appended per distinct score,
/// so tied scores produce a single diagonal segment and trapezoidal area
/// equals the Mann-Whitney statistic.
struct RocResult {
  std::vector<double> thresholds;
  std::vector<double> tpr;
  std::vector<double> fpr;
  double auc = 0.0;
};

/// AUC as the Mann-Whitney statistic: the fraction of (positive, negative)
/// pairs ranked correctly, ties credited 0.5. Computed through midranks,
/// which is algebraically identical to pair counting.
inline RocResult auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatchError("auc_roc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int l : labels) pos += (l != 0);
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw SingleClassError("auc_roc needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Midrank sum over positives (ranks are 1-based in ascending score order).
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) rank_sum_pos += midrank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  const double q = static_cast<double>(neg);
  const double auc = (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q);

  RocResult out;
  out.auc = auc;
  out.thresholds.push_back(std::numeric_limits<double>::infinity());
  out.tpr.push_back(0.0);
  out.fpr.push_back(0.0);
  // Walk thresholds from the highest score down; predict positive at
  // score >= threshold.
  std::size_t tp = 0, fp = 0;
  std::size_t k = n;
  while (k > 0) {
    std::size_t j = k;
    const double s = scores[order[k - 1]];
    while (j > 0 && scores[order[j - 1]] == s) {
      if (labels[order[j - 1]] != 0) {
        ++tp;
      } else {
        ++fp;
      }
      --j;
    }
    out.thresholds.push_back(s);
    out.tpr.push_back(static_cast<double>(tp) / p);
    out.fpr.push_back(static_cast<double>(fp) / q);
    k = j;
  }
  return out;
}

/// Trapezoidal area of a stored curve; RocResult guarantees this matches
/// auc within 1e-12.
inline double roc_trapezoid_area(const RocResult& roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.fpr.size(); ++i) {
    area += 0.5 * (roc.fpr[i] - roc.fpr[i - 1]) * (roc.tpr[i] + roc.tpr[i - 1]);
  }
  return area;
}

}  // namespace synthpipe
