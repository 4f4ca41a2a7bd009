#include "tsk/stats.hpp"

#include "tsk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsk {

std::vector<double> bh_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const auto i = order[k];
    running = std::min(running, p[i] * double(m) / double(k + 1));
    // p*m/m can round below p
    adjusted[i] = std::clamp(running, p[i], 1.0);
  }
  return adjusted;
}

Eigen::MatrixXd rank_per_dataset(const Eigen::MatrixXd& scores) {
  const auto k = scores.rows();
  Eigen::MatrixXd ranks(k, scores.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores(a, j) > scores(b, j); });
    for (std::size_t lo = 0; lo < order.size();) {
      std::size_t hi = lo;
      while (hi + 1 < order.size() && scores(order[hi + 1], j) == scores(order[lo], j)) ++hi;
      const double avg = 0.5 * double(lo + hi) + 1.0;
      for (std::size_t t = lo; t <= hi; ++t) ranks(order[t], j) = avg;
      lo = hi + 1;
    }
  }
  return ranks;
}

DunnResult dunn_fdr(const Eigen::MatrixXd& scores, std::optional<int> control) {
  const auto k = scores.rows();
  const auto n = scores.cols();
  if (k < 2 || n < 2) {
    throw Error(ErrorKind::InvalidArgument, "Dunn's test needs at least 2 algorithms and 2 datasets");
  }
  if (!scores.allFinite()) throw Error(ErrorKind::NumericFailure, "score matrix has non-finite entries");
  if (scores.maxCoeff() == scores.minCoeff()) {
    throw Error(ErrorKind::DegenerateRanks, "all scores are identical; ranks carry no information");
  }
  if (control && (*control < 0 || *control >= k)) throw Error(ErrorKind::InvalidArgument, "control index out of range");

  DunnResult res;
  res.ranks = rank_per_dataset(scores);
  res.mean_ranks = res.ranks.rowwise().mean();
  const double se = std::sqrt(double(k) * double(k + 1) / (6.0 * double(n)));

  auto compare = [&](int a, int b) {
    const double z = (res.mean_ranks(a) - res.mean_ranks(b)) / se;
    res.comparisons.push_back({a, b, z, std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0});
  };
  for (int a = 0; a < int(k); ++a) {
    for (int b = a + 1; b < int(k); ++b) {
      if (!control || a == *control || b == *control) compare(a, b);
    }
  }
  std::vector<double> raw;
  for (const auto& c : res.comparisons) raw.push_back(c.p_raw);
  const auto adj = bh_adjust(raw);
  for (std::size_t i = 0; i < adj.size(); ++i) res.comparisons[i].p_adjusted = adj[i];
  return res;
}

}  // namespace tsk
