#include "tsk/eval.hpp"

#include "tsk/error.hpp"

#include <algorithm>
#include <cmath>

namespace tsk {

Metrics compute_metrics(const Labels& truth, const Labels& predicted, int num_classes) {
  if (truth.size() != predicted.size()) throw Error(ErrorKind::DimensionMismatch, "truth and prediction lengths differ");
  if (truth.empty()) throw Error(ErrorKind::EmptyTable, "cannot evaluate on an empty test set");
  Metrics m;
  m.confusion.assign(std::size_t(num_classes), std::vector<std::int64_t>(std::size_t(num_classes), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw Error(ErrorKind::UnknownLabel, "label out of range in evaluation");
    }
    ++m.confusion[std::size_t(t)][std::size_t(p)];
  }
  std::int64_t correct = 0;
  double recall_sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    const auto& row = m.confusion[std::size_t(c)];
    std::int64_t count = 0;
    for (auto v : row) count += v;
    correct += row[std::size_t(c)];
    if (count == 0) {
      m.absent_classes.push_back(c);
      continue;
    }
    recall_sum += double(row[std::size_t(c)]) / double(count);
    ++present;
  }
  m.rca = double(correct) / double(truth.size());
  m.bca = recall_sum / double(present);
  return m;
}

Metrics evaluate(const TSKModel& model, const Dataset& test) {
  return compute_metrics(test.y, predict_labels(test.X, model), int(model.num_classes()));
}

double firing_entropy(const Vector& profile) {
  double e = 0.0;
  for (Eigen::Index r = 0; r < profile.size(); ++r) {
    const double f = profile(r);
    if (f > 0.0) e -= f * std::log(f);
  }
  return std::max(e, 0.0);
}

double FiringDiagnostics::mean_entropy() const { return entropy.size() ? entropy.mean() : 0.0; }

double FiringDiagnostics::firing_variance() const {
  return (mean_firing.array() - mean_firing.mean()).square().mean();
}

FiringDiagnostics firing_diagnostics(const TSKModel& model, const Matrix& X) {
  const Matrix firing = firing_levels(X, model);
  FiringDiagnostics d;
  d.mean_firing = firing.colwise().mean().transpose();
  d.entropy.resize(firing.rows());
  for (Eigen::Index n = 0; n < firing.rows(); ++n) d.entropy(n) = firing_entropy(firing.row(n).transpose());
  return d;
}

Histogram histogram(const Vector& values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw Error(ErrorKind::InvalidArgument, "histogram needs bins >= 1 and hi > lo");
  Histogram h;
  h.counts.assign(std::size_t(bins), 0);
  for (int i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * double(i) / double(bins));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    auto b = int(std::floor((values(i) - lo) / (hi - lo) * bins));
    ++h.counts[std::size_t(std::clamp(b, 0, bins - 1))];
  }
  return h;
}

}  // namespace tsk
