#pragma once

#include "tsk/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace tsk {

// Target mean firing level for the uniform regularizer. The regularized
// training objective offers both 1/R and 1/C; which one is used is always
// recorded in reports.
struct UrTarget {
  enum class Kind { InverseRules, InverseClasses, Fixed };
  Kind kind = Kind::InverseRules;
  double value = 0.0;  // only for Fixed

  double resolve(Eigen::Index rules, Eigen::Index classes) const;
  std::string describe() const;
  static UrTarget parse(const std::string& text);  // "1/R", "1/C" or a number in (0, 1]
};

struct LossConfig {
  double alpha = 0.05;   // L2 weight on consequent parameters
  double lambda = 0.0;   // uniform regularization weight
  UrTarget ur_target{};
};

struct LossBreakdown {
  double ce = 0.0;
  double l2 = 0.0;
  double ur = 0.0;
  double total = 0.0;
};

// Gradients with the same layout as the trainable model parameters.
struct GradientBundle {
  Matrix d_centers;
  Matrix d_spreads;
  Matrix d_bias;
  Matrix d_weights;
  std::vector<Vector> d_gamma;
  std::vector<Vector> d_beta;

  static GradientBundle zeros_like(const TSKModel& model);
  double l1_antecedent() const;
  double l1_consequent() const;
  bool all_finite() const;
};

struct CrossEntropy {
  double loss;
  Matrix d_scores;
};

// Batch-mean softmax cross entropy and its gradient w.r.t. the scores.
CrossEntropy softmax_cross_entropy(const Matrix& scores, const Labels& y);

// Sum of squares of every consequent bias and weight.
double l2_penalty(const Consequents& cons);

// sum_r (mean_n firing(n, r) - tau)^2 over a batch of normalized firing levels.
double ur_penalty(const Matrix& firing, double tau);

LossBreakdown total_loss(const Matrix& X, const Labels& y, const TSKModel& model, const LossConfig& cfg,
                         Mode mode = Mode::Train);

struct BackwardResult {
  LossBreakdown loss;
  GradientBundle grads;
  std::vector<BatchStats> batch_stats;  // per BN block, train mode only
};

// Loss and exact gradients w.r.t. centers, spreads, consequents and BN
// affine parameters. Pure: BN running statistics are not touched.
BackwardResult backward(const Matrix& X, const Labels& y, const TSKModel& model, const LossConfig& cfg,
                        Mode mode = Mode::Train);

// Flat views of the trainable parameters in a fixed order: centers,
// spreads, bias, weights, then gamma and beta of each BN block.
std::vector<std::span<double>> parameter_views(TSKModel& model);
std::vector<std::span<const double>> gradient_views(const GradientBundle& grads);

}  // namespace tsk
