#pragma once

#include "tsk/rule_base.hpp"

#include <cstdint>
#include <vector>

namespace tsk {

struct TSKModel;

// Learnable affine parameters and running statistics of one BN layer.
struct BNBlock {
  Vector gamma;
  Vector beta;
  Vector running_mean;
  Vector running_var;
  double epsilon = 1e-8;
  double momentum = 0.1;
  std::int64_t batches_seen = 0;

  static BNBlock identity(Eigen::Index dim);
  Eigen::Index dim() const { return gamma.size(); }
  bool initialized() const { return batches_seen > 0; }
};

// Population (1/N) statistics of a batch.
struct BatchStats {
  Vector mean;
  Vector var;
};

BatchStats batch_statistics(const Matrix& batch);

// gamma * (x - mean) / sqrt(var + eps) + beta, row by row.
Matrix bn_apply(const Matrix& X, const BNBlock& block, const Vector& mean, const Vector& var);

void update_running_stats(BNBlock& block, const BatchStats& stats);

struct BNTrainOutput {
  Matrix normalized;
  BatchStats stats;
};

// Normalizes with batch statistics and folds them into the running averages.
BNTrainOutput bn_train_forward(const Matrix& batch, BNBlock& block);

Vector bn_eval_forward(const Vector& x, const BNBlock& block);
Matrix bn_eval_forward(const Matrix& X, const BNBlock& block);

// Consequents whose plain evaluation on raw x equals evaluating the given
// consequents on the eval-mode BN output.
Consequents fold(const Consequents& cons, const BNBlock& block);

// Rule-specific fold: rule r is folded with blocks[r].
Consequents fold_per_rule(const Consequents& cons, const std::vector<BNBlock>& blocks);

// Returns a model without BN whose eval-mode outputs equal the input
// model's. Shared-consequent and rule-specific BN are foldable; global BN
// is rejected with FoldNotApplicable. A model without BN is returned as is.
TSKModel fold_model(const TSKModel& model);

}  // namespace tsk
