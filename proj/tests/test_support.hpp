#pragma once

// Independent reference implementations used as oracles: plain loops over
// the model definition, no log-space tricks, no shared code with src/.

#include "tsk/model.hpp"
#include "tsk/lossgrad.hpp"
#include "tsk/rng.hpp"

#include <cmath>
#include <random>

namespace tsk::testing {

inline TSKModel random_model(int R, int D, int C, BNVariant variant, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  TSKModel m = TSKModel::zeros(R, D, C, variant);
  for (int r = 0; r < R; ++r)
    for (int d = 0; d < D; ++d) {
      m.antecedents.centers(r, d) = n01(rng);
      m.antecedents.spreads(r, d) = u(rng) * (n01(rng) < 0 ? -1.0 : 1.0);
    }
  for (Eigen::Index i = 0; i < m.consequents.bias.size(); ++i) m.consequents.bias.data()[i] = n01(rng);
  for (Eigen::Index i = 0; i < m.consequents.weights.size(); ++i) m.consequents.weights.data()[i] = n01(rng);
  for (auto& b : m.bn) {
    for (int d = 0; d < D; ++d) {
      b.gamma(d) = u(rng);
      b.beta(d) = 0.5 * n01(rng);
      b.running_mean(d) = n01(rng);
      b.running_var(d) = u(rng) + 0.5;
    }
    b.batches_seen = 1;
  }
  return m;
}

inline Matrix random_matrix(int N, int D, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n01(0.0, scale);
  Matrix X(N, D);
  for (int i = 0; i < N; ++i)
    for (int d = 0; d < D; ++d) X(i, d) = n01(rng);
  return X;
}

struct NaiveOutput {
  Matrix scores;
  Matrix firing;
};

// Straight transcription of the definitions: product of Gaussian grades,
// division by the sum, affine consequents, BN with batch or running stats.
inline NaiveOutput naive_forward(const Matrix& X, const TSKModel& m, bool train) {
  const int N = int(X.rows()), D = int(X.cols());
  const int R = int(m.antecedents.centers.rows()), C = int(m.consequents.bias.cols());

  auto normalize = [&](const BNBlock& b) {
    Matrix Z(N, D);
    for (int d = 0; d < D; ++d) {
      double mean = 0, var = 0;
      if (train) {
        for (int n = 0; n < N; ++n) mean += X(n, d);
        mean /= N;
        for (int n = 0; n < N; ++n) var += (X(n, d) - mean) * (X(n, d) - mean);
        var /= N;
      } else {
        mean = b.running_mean(d);
        var = b.running_var(d);
      }
      for (int n = 0; n < N; ++n) Z(n, d) = b.gamma(d) * (X(n, d) - mean) / std::sqrt(var + b.epsilon) + b.beta(d);
    }
    return Z;
  };

  std::vector<Matrix> cons_in;
  Matrix ant_in = X;
  switch (m.bn_variant) {
    case BNVariant::None: cons_in.assign(std::size_t(R), X); break;
    case BNVariant::Consequent: cons_in.assign(std::size_t(R), normalize(m.bn[0])); break;
    case BNVariant::Global:
      ant_in = normalize(m.bn[0]);
      cons_in.assign(std::size_t(R), ant_in);
      break;
    case BNVariant::RuleSpecific:
      for (int r = 0; r < R; ++r) cons_in.push_back(normalize(m.bn[std::size_t(r)]));
      break;
  }

  NaiveOutput out{Matrix::Zero(N, C), Matrix::Zero(N, R)};
  for (int n = 0; n < N; ++n) {
    std::vector<double> f(std::size_t(R), 1.0);
    double total = 0;
    for (int r = 0; r < R; ++r) {
      for (int d = 0; d < D; ++d) {
        const double s = m.antecedents.spreads(r, d);
        const double diff = ant_in(n, d) - m.antecedents.centers(r, d);
        f[std::size_t(r)] *= std::exp(-diff * diff / (2 * std::max(s * s, 1e-16)));
      }
      total += f[std::size_t(r)];
    }
    for (int r = 0; r < R; ++r) {
      const double fbar = f[std::size_t(r)] / total;
      out.firing(n, r) = fbar;
      for (int c = 0; c < C; ++c) {
        double y = m.consequents.bias(r, c);
        for (int d = 0; d < D; ++d) y += m.consequents.weight(r, d, c) * cons_in[std::size_t(r)](n, d);
        out.scores(n, c) += fbar * y;
      }
    }
  }
  return out;
}

inline double naive_loss(const Matrix& X, const Labels& y, const TSKModel& m, double alpha, double lambda, double tau,
                         bool train) {
  const auto o = naive_forward(X, m, train);
  const int N = int(X.rows());
  double ce = 0;
  for (int n = 0; n < N; ++n) {
    double z = 0;
    for (int c = 0; c < o.scores.cols(); ++c) z += std::exp(o.scores(n, c));
    ce -= std::log(std::exp(o.scores(n, y[std::size_t(n)])) / z);
  }
  ce /= N;
  double l2 = 0;
  for (Eigen::Index i = 0; i < m.consequents.bias.size(); ++i) l2 += std::pow(m.consequents.bias.data()[i], 2);
  for (Eigen::Index i = 0; i < m.consequents.weights.size(); ++i) l2 += std::pow(m.consequents.weights.data()[i], 2);
  double ur = 0;
  for (int r = 0; r < o.firing.cols(); ++r) {
    double mean = 0;
    for (int n = 0; n < N; ++n) mean += o.firing(n, r);
    mean /= N;
    ur += (mean - tau) * (mean - tau);
  }
  return ce + alpha * l2 + lambda * ur;
}

inline Labels random_labels(int N, int C, Rng& rng) {
  std::uniform_int_distribution<int> u(0, C - 1);
  Labels y(static_cast<std::size_t>(N));
  for (auto& v : y) v = u(rng);
  return y;
}

struct GradCheck {
  double worst_rel = 0.0;  // largest relative error among entries above the absolute floor
  int failures = 0;
  int checked = 0;
};

// Central differences of the naive loss against the analytic gradients.
inline GradCheck finite_difference_check(const Matrix& X, const Labels& y, const TSKModel& model,
                                         const LossConfig& cfg, double h = 1e-5, double rel_tol = 1e-4,
                                         double abs_floor = 1e-8) {
  const double tau = cfg.ur_target.resolve(model.num_rules(), model.num_classes());
  const auto analytic = backward(X, y, model, cfg, Mode::Train).grads;
  const auto grads = gradient_views(analytic);
  TSKModel probe = model;
  auto params = parameter_views(probe);
  GradCheck out;
  for (std::size_t g = 0; g < params.size(); ++g) {
    for (std::size_t i = 0; i < params[g].size(); ++i) {
      const double saved = params[g][i];
      params[g][i] = saved + h;
      const double up = naive_loss(X, y, probe, cfg.alpha, cfg.lambda, tau, true);
      params[g][i] = saved - h;
      const double down = naive_loss(X, y, probe, cfg.alpha, cfg.lambda, tau, true);
      params[g][i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = grads[g][i];
      const double diff = std::abs(a - numeric);
      ++out.checked;
      if (diff <= abs_floor) continue;
      const double rel = diff / std::max(std::abs(a), std::abs(numeric));
      out.worst_rel = std::max(out.worst_rel, rel);
      if (rel > rel_tol) ++out.failures;
    }
  }
  return out;
}

}  // namespace tsk::testing
