#pragma once

#include "tsk/batchnorm.hpp"
#include "tsk/rule_base.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace tsk {

enum class BNVariant {
  None,
  Consequent,    // one BN layer shared by all rule consequents
  Global,        // BN output feeds antecedents and consequents
  RuleSpecific,  // one BN layer per rule consequent
};

std::string_view to_string(BNVariant v);
BNVariant parse_bn_variant(std::string_view name);

enum class Mode { Train, Eval };

struct TSKModel {
  Antecedents antecedents;
  Consequents consequents;
  BNVariant bn_variant = BNVariant::None;
  std::vector<BNBlock> bn;  // empty, one block, or one block per rule

  Eigen::Index num_rules() const { return antecedents.num_rules(); }
  Eigen::Index dim() const { return antecedents.dim(); }
  Eigen::Index num_classes() const { return consequents.num_classes(); }

  // All-zero parameters with identity BN blocks for the variant.
  static TSKModel zeros(Eigen::Index rules, Eigen::Index dim, Eigen::Index classes, BNVariant variant);

  // Throws DimensionMismatch if R, D, C or the BN layout disagree.
  void validate() const;
};

std::size_t expected_bn_blocks(BNVariant variant, Eigen::Index rules);

// ---- single-sample building blocks -------------------------------------

double membership_grade(double x, double center, double spread);

// Log of the product t-norm firing level of every rule.
Vector log_firing(const Vector& x, const Antecedents& ant);

// Max-shifted softmax of log firing levels.
Vector normalized_firing(const Vector& log_f);

// R x C matrix of rule outputs y_r^c(x).
Matrix consequent_outputs(const Vector& x, const Consequents& cons);

struct SampleOutput {
  Vector scores;
  Vector firing;
};

// Single-sample forward pass. Train mode needs batch statistics and so is
// rejected here for BN models (use forward_batch).
SampleOutput forward(const Vector& x, const TSKModel& model, Mode mode = Mode::Eval);

// argmax with ties resolved to the lowest index.
int predict(const Vector& scores);

// ---- batched forward -----------------------------------------------------

// Intermediate values of a batched forward pass, kept for backprop.
struct ForwardCache {
  Matrix antecedent_input;               // N x D
  std::vector<Matrix> consequent_input;  // 1 shared or R rule-specific, N x D each
  std::vector<Matrix> normalized;        // x-hat per BN block
  std::vector<Vector> inv_std;           // 1/sqrt(var + eps) per BN block
  std::vector<BatchStats> stats;         // statistics used per BN block
  Matrix log_firing;                     // N x R
  Matrix firing;                         // N x R, rows sum to 1
  Matrix rule_outputs;                   // N x (R * C)
  Matrix scores;                         // N x C
};

// Train mode normalizes with the batch's own statistics and leaves the
// model untouched; running statistics are updated by the training loop.
ForwardCache forward_batch(const Matrix& X, const TSKModel& model, Mode mode);

// Eval-mode class scores, N x C.
Matrix predict_scores(const Matrix& X, const TSKModel& model);
std::vector<int> predict_labels(const Matrix& X, const TSKModel& model);

// Eval-mode normalized firing levels, N x R.
Matrix firing_levels(const Matrix& X, const TSKModel& model);

}  // namespace tsk
