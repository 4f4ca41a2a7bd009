#pragma once

#include "tsk/data.hpp"

namespace tsk {

// Gaussian membership functions of the rule antecedents, one row per rule.
// Spreads are stored unconstrained; only their square is ever used.
struct Antecedents {
  Matrix centers;  // R x D
  Matrix spreads;  // R x D

  Eigen::Index num_rules() const { return centers.rows(); }
  Eigen::Index dim() const { return centers.cols(); }
};

// Affine rule consequents. Rule r's weights for all classes are the
// contiguous D x C block weights.middleCols(r * C, C).
struct Consequents {
  Matrix bias;     // R x C
  Matrix weights;  // D x (R * C)

  Eigen::Index num_rules() const { return bias.rows(); }
  Eigen::Index num_classes() const { return bias.cols(); }
  Eigen::Index dim() const { return weights.rows(); }

  double& weight(Eigen::Index r, Eigen::Index d, Eigen::Index c) { return weights(d, r * num_classes() + c); }
  double weight(Eigen::Index r, Eigen::Index d, Eigen::Index c) const {
    return weights(d, r * num_classes() + c);
  }
  auto rule_weights(Eigen::Index r) { return weights.middleCols(r * num_classes(), num_classes()); }
  auto rule_weights(Eigen::Index r) const { return weights.middleCols(r * num_classes(), num_classes()); }

  static Consequents zeros(Eigen::Index rules, Eigen::Index dim, Eigen::Index classes) {
    return {Matrix::Zero(rules, classes), Matrix::Zero(dim, rules * classes)};
  }
};

// Lower bound applied to sigma^2 wherever it divides.
inline constexpr double kMinSpreadSquared = 1e-16;

}  // namespace tsk
