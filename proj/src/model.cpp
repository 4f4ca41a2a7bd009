#include "tsk/model.hpp"

#include "tsk/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsk {

std::string_view to_string(BNVariant v) {
  switch (v) {
    case BNVariant::None: return "none";
    case BNVariant::Consequent: return "consequent";
    case BNVariant::Global: return "global";
    case BNVariant::RuleSpecific: return "rule";
  }
  return "none";
}

BNVariant parse_bn_variant(std::string_view name) {
  if (name == "none") return BNVariant::None;
  if (name == "consequent") return BNVariant::Consequent;
  if (name == "global") return BNVariant::Global;
  if (name == "rule") return BNVariant::RuleSpecific;
  throw Error(ErrorKind::InvalidArgument, "unknown BN variant '" + std::string(name) + "'",
              {{"value", std::string(name)}, {"expected", "none|consequent|global|rule"}});
}

std::size_t expected_bn_blocks(BNVariant variant, Eigen::Index rules) {
  switch (variant) {
    case BNVariant::None: return 0;
    case BNVariant::Consequent:
    case BNVariant::Global: return 1;
    case BNVariant::RuleSpecific: return std::size_t(rules);
  }
  return 0;
}

TSKModel TSKModel::zeros(Eigen::Index rules, Eigen::Index dim, Eigen::Index classes, BNVariant variant) {
  TSKModel m;
  m.antecedents.centers = Matrix::Zero(rules, dim);
  m.antecedents.spreads = Matrix::Ones(rules, dim);
  m.consequents = Consequents::zeros(rules, dim, classes);
  m.bn_variant = variant;
  m.bn.assign(expected_bn_blocks(variant, rules), BNBlock::identity(dim));
  return m;
}

void TSKModel::validate() const {
  const auto R = num_rules();
  const auto D = dim();
  auto fail = [](const std::string& what) { throw Error(ErrorKind::DimensionMismatch, "inconsistent model: " + what); };
  if (R < 1) fail("no rules");
  if (antecedents.spreads.rows() != R || antecedents.spreads.cols() != D) fail("spreads shape");
  if (consequents.bias.rows() != R) fail("bias rows");
  if (consequents.weights.rows() != D || consequents.weights.cols() != R * num_classes()) fail("weights shape");
  if (bn.size() != expected_bn_blocks(bn_variant, R)) fail("BN block count for variant");
  for (const auto& b : bn) {
    if (b.gamma.size() != D || b.beta.size() != D || b.running_mean.size() != D || b.running_var.size() != D) {
      fail("BN block dimension");
    }
  }
}

double membership_grade(double x, double center, double spread) {
  const double s2 = std::max(spread * spread, kMinSpreadSquared);
  const double d = x - center;
  return std::exp(-d * d / (2.0 * s2));
}

namespace {

// log firing of every (sample, rule) pair, straight from the definition.
void log_firing_into(const Matrix& A, const Antecedents& ant, Matrix& out) {
  const auto N = A.rows();
  const auto R = ant.num_rules();
  const auto D = ant.dim();
  const Matrix inv2s = (2.0 * ant.spreads.array().square().max(kMinSpreadSquared)).inverse().matrix();
  out = Matrix::Zero(N, R);
  for (Eigen::Index r = 0; r < R; ++r) {
    auto col = out.col(r);
    for (Eigen::Index d = 0; d < D; ++d) {
      const double m = ant.centers(r, d);
      const double w = inv2s(r, d);
      for (Eigen::Index n = 0; n < N; ++n) {
        const double diff = A(n, d) - m;
        col(n) -= diff * diff * w;
      }
    }
  }
}

void softmax_rows(const Matrix& logits, Matrix& out) {
  out.resize(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const double mx = logits.row(n).maxCoeff();
    out.row(n) = (logits.row(n).array() - mx).exp();
    out.row(n) /= out.row(n).sum();
  }
}

}  // namespace

Vector log_firing(const Vector& x, const Antecedents& ant) {
  if (x.size() != ant.dim()) throw Error(ErrorKind::DimensionMismatch, "input dimension does not match antecedents");
  Matrix out;
  log_firing_into(x.transpose(), ant, out);
  return out.row(0).transpose();
}

Vector normalized_firing(const Vector& log_f) {
  if (log_f.size() < 1) throw Error(ErrorKind::DimensionMismatch, "need at least one rule");
  const double mx = log_f.maxCoeff();
  Vector f = (log_f.array() - mx).exp().matrix();
  return f / f.sum();
}

Matrix consequent_outputs(const Vector& x, const Consequents& cons) {
  if (x.size() != cons.dim()) throw Error(ErrorKind::DimensionMismatch, "input dimension does not match consequents");
  Matrix y(cons.num_rules(), cons.num_classes());
  for (Eigen::Index r = 0; r < cons.num_rules(); ++r) {
    y.row(r) = cons.bias.row(r) + x.transpose() * cons.rule_weights(r);
  }
  return y;
}

ForwardCache forward_batch(const Matrix& X, const TSKModel& model, Mode mode) {
  if (X.cols() != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "input has " + std::to_string(X.cols()) + " features, model expects " + std::to_string(model.dim()));
  }
  const auto R = model.num_rules();
  const auto C = model.num_classes();
  const auto N = X.rows();

  ForwardCache cache;
  if (model.bn_variant != BNVariant::None) {
    BatchStats train_stats;
    if (mode == Mode::Train) train_stats = batch_statistics(X);
    for (const auto& block : model.bn) {
      BatchStats s;
      if (mode == Mode::Train) {
        s = train_stats;
      } else {
        if (!block.initialized()) {
          throw Error(ErrorKind::UninitializedRunningStats, "BN running statistics have not seen a training batch");
        }
        s = {block.running_mean, block.running_var};
      }
      Vector inv_std = (s.var.array() + block.epsilon).rsqrt().matrix();
      cache.normalized.push_back(((X.rowwise() - s.mean.transpose()).array().rowwise() * inv_std.transpose().array()).matrix());
      cache.consequent_input.push_back(
          ((cache.normalized.back().array().rowwise() * block.gamma.transpose().array()).rowwise() +
           block.beta.transpose().array())
              .matrix());
      cache.inv_std.push_back(std::move(inv_std));
      cache.stats.push_back(std::move(s));
    }
  } else {
    cache.consequent_input.push_back(X);
  }
  cache.antecedent_input = model.bn_variant == BNVariant::Global ? cache.consequent_input.front() : X;

  log_firing_into(cache.antecedent_input, model.antecedents, cache.log_firing);
  softmax_rows(cache.log_firing, cache.firing);

  const auto& cons = model.consequents;
  if (cache.consequent_input.size() == 1) {
    cache.rule_outputs.noalias() = cache.consequent_input.front() * cons.weights;
  } else {
    cache.rule_outputs.resize(N, R * C);
    for (Eigen::Index r = 0; r < R; ++r) {
      cache.rule_outputs.middleCols(r * C, C).noalias() = cache.consequent_input[std::size_t(r)] * cons.rule_weights(r);
    }
  }
  for (Eigen::Index r = 0; r < R; ++r) cache.rule_outputs.middleCols(r * C, C).rowwise() += cons.bias.row(r);

  cache.scores = Matrix::Zero(N, C);
  for (Eigen::Index r = 0; r < R; ++r) {
    cache.scores += (cache.rule_outputs.middleCols(r * C, C).array().colwise() * cache.firing.col(r).array()).matrix();
  }
  return cache;
}

SampleOutput forward(const Vector& x, const TSKModel& model, Mode mode) {
  if (mode == Mode::Train && model.bn_variant != BNVariant::None) {
    throw Error(ErrorKind::BatchTooSmall, "train-mode BN needs a batch; use forward_batch");
  }
  auto cache = forward_batch(x.transpose(), model, mode);
  return {cache.scores.row(0).transpose(), cache.firing.row(0).transpose()};
}

int predict(const Vector& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c)
    if (scores(c) > scores(best)) best = c;
  return int(best);
}

Matrix predict_scores(const Matrix& X, const TSKModel& model) { return forward_batch(X, model, Mode::Eval).scores; }

std::vector<int> predict_labels(const Matrix& X, const TSKModel& model) {
  const Matrix scores = predict_scores(X, model);
  std::vector<int> out(std::size_t(scores.rows()));
  for (Eigen::Index n = 0; n < scores.rows(); ++n) out[std::size_t(n)] = predict(scores.row(n).transpose());
  return out;
}

Matrix firing_levels(const Matrix& X, const TSKModel& model) { return forward_batch(X, model, Mode::Eval).firing; }

}  // namespace tsk
