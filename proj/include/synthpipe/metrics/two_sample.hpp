#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "synthpipe/core/errors.hpp"

namespace synthpipe {

/// Gaussian RBF kernel configuration. An empty bandwidth selects the
/// median heuristic on the pooled sample.
struct KernelConfig {
  std::optional<double> bandwidth;  // sigma

  static KernelConfig median_heuristic() { return KernelConfig{std::nullopt}; }
  static KernelConfig fixed(double sigma) {
    if (!(sigma > 0.0)) throw InvalidConfigError("kernel bandwidth must be positive");
    return KernelConfig{sigma};
  }
};

/// sigma with sigma^2 = median of squared pairwise Euclidean distances / 2.
/// Rows of `emb` are embedding vectors.
inline double median_heuristic_bandwidth(const Eigen::MatrixXd& emb) {
  const Eigen::Index n = emb.rows();
  if (n < 2) throw DegenerateSetError("median heuristic needs at least two vectors");
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d2.push_back((emb.row(i) - emb.row(j)).squaredNorm());
    }
  }
  const std::size_t mid = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + mid, d2.end());
  double med = d2[mid];
  if (d2.size() % 2 == 0) {
    double lower = *std::max_element(d2.begin(), d2.begin() + mid);
    med = 0.5 * (lower + med);
  }
  if (med <= 0.0) throw DegenerateSetError("all embedding vectors identical");
  return std::sqrt(med / 2.0);
}

namespace detail {

// Row sums of exp(-||a_i - b_j||^2 / (2 sigma^2)) accumulated in a fixed
// order (rows sequentially), so results do not depend on threading.
inline double kernel_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma) {
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    total += (-gamma * (b.rowwise() - a.row(i)).rowwise().squaredNorm().array())
                 .exp()
                 .sum();
  }
  return total;
}

}  // namespace detail

/// Biased V-statistic kernel MMD between two embedding sets (rows are
/// vectors). Returns the square root, clamped at zero, so identical
/// multisets give exactly 0.
inline double kmmd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                   const KernelConfig& cfg = KernelConfig::median_heuristic()) {
  if (a.rows() == 0 || b.rows() == 0) throw DimensionMismatchError("kmmd: empty sample set");
  if (a.cols() != b.cols()) throw DimensionMismatchError("kmmd: embedding dims differ");
  double sigma;
  if (cfg.bandwidth) {
    if (!(*cfg.bandwidth > 0.0)) throw InvalidConfigError("kernel bandwidth must be positive");
    sigma = *cfg.bandwidth;
  } else {
    Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
    pooled << a, b;
    sigma = median_heuristic_bandwidth(pooled);
  }
  const double m = static_cast<double>(a.rows());
  const double n = static_cast<double>(b.rows());
  const double mmd2 = detail::kernel_sum(a, a, sigma) / (m * m) +
                      detail::kernel_sum(b, b, sigma) / (n * n) -
                      2.0 * detail::kernel_sum(a, b, sigma) / (m * n);
  return std::sqrt(std::max(mmd2, 0.0));
}

/// Leave-one-out 1-nearest-neighbor accuracy for the real-vs-synthetic
/// two-sample test. Both sets are pooled (real first); each point is
/// classified by the label of its nearest other point, ties broken toward
/// the lowest pooled index. 0.5 is the ideal, 0 indicates memorization,
/// 1 indicates disjoint distributions.
inline double one_nn_loo_accuracy(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth) {
  if (real.rows() == 0 || synth.rows() == 0) {
    throw DimensionMismatchError("one_nn_loo_accuracy: empty sample set");
  }
  if (real.cols() != synth.cols()) {
    throw DimensionMismatchError("one_nn_loo_accuracy: embedding dims differ");
  }
  const Eigen::Index m = real.rows();
  const Eigen::Index total = m + synth.rows();
  Eigen::MatrixXd pooled(total, real.cols());
  pooled << real, synth;

  Eigen::Index correct = 0;
  Eigen::VectorXd dist(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    dist = (pooled.rowwise() - pooled.row(i)).rowwise().squaredNorm();
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < total; ++j) {
      if (j == i) continue;
      if (dist(j) < best_d) {
        best_d = dist(j);
        best = j;
      }
    }
    const bool label_i = i < m;
    const bool label_nn = best < m;
    if (label_i == label_nn) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace synthpipe
