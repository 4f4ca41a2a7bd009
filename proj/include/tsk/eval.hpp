#pragma once

#include "tsk/model.hpp"

#include <cstdint>
#include <vector>

namespace tsk {

struct Metrics {
  double rca = 0.0;
  double bca = 0.0;
  // confusion[true][predicted]
  std::vector<std::vector<std::int64_t>> confusion;
  // Classes with no test sample; they are left out of the BCA mean.
  std::vector<int> absent_classes;
};

Metrics compute_metrics(const Labels& truth, const Labels& predicted, int num_classes);

// Eval-mode (running BN statistics) metrics of a model on a dataset.
Metrics evaluate(const TSKModel& model, const Dataset& test);

// Shannon entropy (natural log) of a normalized firing profile, 0 ln 0 = 0.
double firing_entropy(const Vector& profile);

struct FiringDiagnostics {
  Vector mean_firing;  // per rule, sums to 1
  Vector entropy;      // per sample, in [0, ln R]

  double mean_entropy() const;
  // Population variance across rules of mean_firing.
  double firing_variance() const;
};

FiringDiagnostics firing_diagnostics(const TSKModel& model, const Matrix& X);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::int64_t> counts;
};

// Equal-width histogram over [lo, hi]; values outside are clamped into the
// edge bins.
Histogram histogram(const Vector& values, int bins, double lo, double hi);

}  // namespace tsk
