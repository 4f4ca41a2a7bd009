#include "tsk/error.hpp"
#include "tsk/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace tsk;

namespace {

// Textbook definition: adjusted_(i) = min over j >= i of m p_(j) / j, capped at 1.
std::vector<double> bh_reference(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (p[j] < p[i]) continue;
      std::size_t rank = 0;  // largest rank among ties
      for (std::size_t l = 0; l < m; ++l) rank += p[l] <= p[j];
      best = std::min(best, p[j] * double(m) / double(rank));
    }
    out[i] = best;
  }
  return out;
}

}  // namespace

TEST(BenjaminiHochberg, MatchesReferenceAndMonotone) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(std::size_t(2 + trial % 15));
    for (auto& v : p) v = u(rng);
    const auto adj = bh_adjust(p);
    const auto ref = bh_reference(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(adj[i], ref[i], 1e-15);
      EXPECT_GE(adj[i], p[i]);
      for (std::size_t j = 0; j < p.size(); ++j)
        if (p[i] < p[j]) EXPECT_LE(adj[i], adj[j]);
    }
  }
}

TEST(BenjaminiHochberg, EqualPValuesUnchanged) {
  const std::vector<double> p(6, 0.03);
  EXPECT_EQ(bh_adjust(p), p);
  EXPECT_EQ(bh_adjust({0.9, 0.95}), (std::vector<double>{0.95, 0.95}));
}

TEST(Ranks, AverageOnTies) {
  Eigen::MatrixXd s(3, 2);
  s << 0.9, 0.5, 0.7, 0.5, 0.7, 0.1;
  const auto r = rank_per_dataset(s);
  EXPECT_EQ(r(0, 0), 1.0);
  EXPECT_EQ(r(1, 0), 2.5);
  EXPECT_EQ(r(2, 0), 2.5);
  EXPECT_EQ(r(0, 1), 1.5);
  EXPECT_EQ(r(2, 1), 3.0);
}

TEST(Dunn, StrictDominanceTwelveDatasets) {
  Eigen::MatrixXd s(2, 12);
  for (int j = 0; j < 12; ++j) {
    s(0, j) = 0.8 + 0.01 * j;
    s(1, j) = 0.7 + 0.01 * j;
  }
  const auto res = dunn_fdr(s);
  ASSERT_EQ(res.comparisons.size(), 1u);
  // mean ranks 1 and 2, SE = sqrt(2*3 / (6*12))
  const double z = -1.0 / std::sqrt(6.0 / 72.0);
  EXPECT_NEAR(res.comparisons[0].z, z, 1e-12);
  EXPECT_NEAR(res.comparisons[0].p_raw, std::erfc(std::abs(z) / std::sqrt(2.0)), 1e-15);
  EXPECT_LT(res.comparisons[0].p_raw, 0.01);
}

TEST(Dunn, IdenticalAlgorithmsGivePOne) {
  Eigen::MatrixXd s(2, 4);
  s << 0.1, 0.5, 0.7, 0.3, 0.1, 0.5, 0.7, 0.3;
  const auto res = dunn_fdr(s);
  EXPECT_EQ(res.comparisons[0].z, 0.0);
  EXPECT_EQ(res.comparisons[0].p_adjusted, 1.0);
}

TEST(Dunn, PairsAndControl) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Random(4, 6);
  EXPECT_EQ(dunn_fdr(s).comparisons.size(), 6u);
  const auto ctl = dunn_fdr(s, 2);
  EXPECT_EQ(ctl.comparisons.size(), 3u);
  for (const auto& c : ctl.comparisons) EXPECT_TRUE(c.first == 2 || c.second == 2);
}

TEST(Dunn, Errors) {
  try {
    dunn_fdr(Eigen::MatrixXd::Constant(3, 4, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateRanks);
  }
  EXPECT_THROW(dunn_fdr(Eigen::MatrixXd::Random(1, 4)), Error);
  EXPECT_THROW(dunn_fdr(Eigen::MatrixXd::Random(3, 1)), Error);
}
