#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace tsk {

// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(const std::vector<double>& p);

// Ranks of the algorithms on every dataset (column): 1 = highest score,
// tied scores share their average rank.
Eigen::MatrixXd rank_per_dataset(const Eigen::MatrixXd& scores);

struct PairwiseComparison {
  int first;
  int second;
  double z;  // (mean rank of first - mean rank of second) / SE
  double p_raw;
  double p_adjusted;
};

struct DunnResult {
  Eigen::MatrixXd ranks;       // algorithms x datasets
  Eigen::VectorXd mean_ranks;  // per algorithm
  std::vector<PairwiseComparison> comparisons;
};

// Dunn's multiple comparison on per-dataset ranks of an algorithms x
// datasets score matrix, with two-sided normal p-values adjusted by
// Benjamini-Hochberg. Compares every pair, or only the control against the
// others when one is given.
DunnResult dunn_fdr(const Eigen::MatrixXd& scores, std::optional<int> control = std::nullopt);

}  // namespace tsk
