#include "tsk/batchnorm.hpp"

#include "tsk/error.hpp"
#include "tsk/model.hpp"

#include <cmath>

namespace tsk {

BNBlock BNBlock::identity(Eigen::Index dim) {
  BNBlock b;
  b.gamma = Vector::Ones(dim);
  b.beta = Vector::Zero(dim);
  b.running_mean = Vector::Zero(dim);
  b.running_var = Vector::Ones(dim);
  return b;
}

BatchStats batch_statistics(const Matrix& batch) {
  if (batch.rows() < 2) {
    throw Error(ErrorKind::BatchTooSmall, "batch normalization needs a batch of at least 2 samples",
                {{"n", std::to_string(batch.rows())}});
  }
  BatchStats s;
  s.mean = batch.colwise().mean().transpose();
  s.var = (batch.rowwise() - s.mean.transpose()).array().square().colwise().mean().transpose();
  return s;
}

Matrix bn_apply(const Matrix& X, const BNBlock& block, const Vector& mean, const Vector& var) {
  if (X.cols() != block.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "BN layer dimension does not match input");
  }
  const Eigen::ArrayXd scale = block.gamma.array() / (var.array() + block.epsilon).sqrt();
  const Eigen::ArrayXd shift = block.beta.array() - mean.array() * scale;
  return ((X.array().rowwise() * scale.transpose()).rowwise() + shift.transpose()).matrix();
}

void update_running_stats(BNBlock& block, const BatchStats& stats) {
  const double m = block.momentum;
  block.running_mean = (1.0 - m) * block.running_mean + m * stats.mean;
  block.running_var = (1.0 - m) * block.running_var + m * stats.var;
  ++block.batches_seen;
}

BNTrainOutput bn_train_forward(const Matrix& batch, BNBlock& block) {
  BNTrainOutput out;
  out.stats = batch_statistics(batch);
  out.normalized = bn_apply(batch, block, out.stats.mean, out.stats.var);
  update_running_stats(block, out.stats);
  return out;
}

namespace {
void require_initialized(const BNBlock& block) {
  if (!block.initialized()) {
    throw Error(ErrorKind::UninitializedRunningStats, "BN running statistics have not seen a training batch");
  }
}
}  // namespace

Vector bn_eval_forward(const Vector& x, const BNBlock& block) {
  require_initialized(block);
  if (x.size() != block.dim()) throw Error(ErrorKind::DimensionMismatch, "BN layer dimension does not match input");
  return (block.gamma.array() * (x - block.running_mean).array() / (block.running_var.array() + block.epsilon).sqrt() +
          block.beta.array())
      .matrix();
}

Matrix bn_eval_forward(const Matrix& X, const BNBlock& block) {
  require_initialized(block);
  return bn_apply(X, block, block.running_mean, block.running_var);
}

namespace {

// Folds BN block into the consequents of rule r only.
void fold_rule(const Consequents& cons, const BNBlock& block, Eigen::Index r, Consequents& out) {
  const Eigen::ArrayXd scale = block.gamma.array() / (block.running_var.array() + block.epsilon).sqrt();
  const Vector shift = (block.beta.array() - block.running_mean.array() * scale).matrix();
  const auto w = cons.rule_weights(r);
  out.rule_weights(r) = (w.array().colwise() * scale).matrix();
  out.bias.row(r) = cons.bias.row(r) + shift.transpose() * w;
}

}  // namespace

Consequents fold(const Consequents& cons, const BNBlock& block) {
  require_initialized(block);
  if (block.dim() != cons.dim()) throw Error(ErrorKind::DimensionMismatch, "BN layer dimension does not match consequents");
  Consequents out = cons;
  for (Eigen::Index r = 0; r < cons.num_rules(); ++r) fold_rule(cons, block, r, out);
  return out;
}

Consequents fold_per_rule(const Consequents& cons, const std::vector<BNBlock>& blocks) {
  if (Eigen::Index(blocks.size()) != cons.num_rules()) {
    throw Error(ErrorKind::DimensionMismatch, "rule-specific fold needs one BN block per rule");
  }
  Consequents out = cons;
  for (Eigen::Index r = 0; r < cons.num_rules(); ++r) {
    const auto& block = blocks[std::size_t(r)];
    require_initialized(block);
    if (block.dim() != cons.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "BN layer dimension does not match consequents");
    }
    fold_rule(cons, block, r, out);
  }
  return out;
}

TSKModel fold_model(const TSKModel& model) {
  model.validate();
  TSKModel out;
  out.antecedents = model.antecedents;
  out.bn_variant = BNVariant::None;
  switch (model.bn_variant) {
    case BNVariant::None:
      return model;
    case BNVariant::Consequent:
      out.consequents = fold(model.consequents, model.bn.front());
      return out;
    case BNVariant::RuleSpecific:
      out.consequents = fold_per_rule(model.consequents, model.bn);
      return out;
    case BNVariant::Global:
      break;
  }
  throw Error(ErrorKind::FoldNotApplicable,
              "global BN normalizes the antecedent inputs too; it cannot be folded into the consequents",
              {{"bn_variant", std::string(to_string(model.bn_variant))}});
}

}  // namespace tsk
