#include "tsk/lossgrad.hpp"

#include "tsk/error.hpp"

#include <charconv>
#include <cmath>

namespace tsk {

double UrTarget::resolve(Eigen::Index rules, Eigen::Index classes) const {
  switch (kind) {
    case Kind::InverseRules: return 1.0 / double(rules);
    case Kind::InverseClasses: return 1.0 / double(classes);
    case Kind::Fixed: return value;
  }
  return 1.0 / double(rules);
}

std::string UrTarget::describe() const {
  switch (kind) {
    case Kind::InverseRules: return "1/R";
    case Kind::InverseClasses: return "1/C";
    case Kind::Fixed: {
      char buf[32];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
      return std::string(buf, p);
    }
  }
  return "1/R";
}

UrTarget UrTarget::parse(const std::string& text) {
  if (text == "1/R") return {Kind::InverseRules, 0.0};
  if (text == "1/C") return {Kind::InverseClasses, 0.0};
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || !(v > 0.0 && v <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "UR target must be 1/R, 1/C or a number in (0, 1]",
                {{"flag", "--ur-target"}, {"value", text}});
  }
  return {Kind::Fixed, v};
}

GradientBundle GradientBundle::zeros_like(const TSKModel& model) {
  GradientBundle g;
  g.d_centers = Matrix::Zero(model.num_rules(), model.dim());
  g.d_spreads = Matrix::Zero(model.num_rules(), model.dim());
  g.d_bias = Matrix::Zero(model.num_rules(), model.num_classes());
  g.d_weights = Matrix::Zero(model.dim(), model.num_rules() * model.num_classes());
  g.d_gamma.assign(model.bn.size(), Vector::Zero(model.dim()));
  g.d_beta.assign(model.bn.size(), Vector::Zero(model.dim()));
  return g;
}

double GradientBundle::l1_antecedent() const { return d_centers.lpNorm<1>() + d_spreads.lpNorm<1>(); }

double GradientBundle::l1_consequent() const { return d_bias.lpNorm<1>() + d_weights.lpNorm<1>(); }

bool GradientBundle::all_finite() const {
  bool ok = d_centers.allFinite() && d_spreads.allFinite() && d_bias.allFinite() && d_weights.allFinite();
  for (const auto& v : d_gamma) ok = ok && v.allFinite();
  for (const auto& v : d_beta) ok = ok && v.allFinite();
  return ok;
}

CrossEntropy softmax_cross_entropy(const Matrix& scores, const Labels& y) {
  const auto N = scores.rows();
  if (Eigen::Index(y.size()) != N) throw Error(ErrorKind::DimensionMismatch, "labels and scores differ in length");
  if (N == 0) throw Error(ErrorKind::EmptyTable, "empty batch");
  CrossEntropy out{0.0, Matrix(N, scores.cols())};
  for (Eigen::Index n = 0; n < N; ++n) {
    const int label = y[std::size_t(n)];
    if (label < 0 || label >= scores.cols()) {
      throw Error(ErrorKind::UnknownLabel, "label " + std::to_string(label) + " out of range");
    }
    const double mx = scores.row(n).maxCoeff();
    auto p = out.d_scores.row(n);
    p = (scores.row(n).array() - mx).exp().matrix();
    Eigen::Index top = 0;
    scores.row(n).maxCoeff(&top);
    double tail = 0.0;
    for (Eigen::Index c = 0; c < p.size(); ++c)
      if (c != top) tail += p(c);
    const double z = 1.0 + tail;
    // log1p keeps precision when the top class dominates
    out.loss += std::log1p(tail) - (scores(n, label) - mx);
    p /= z;
    p(label) -= 1.0;
  }
  out.loss /= double(N);
  out.d_scores /= double(N);
  return out;
}

double l2_penalty(const Consequents& cons) { return cons.bias.squaredNorm() + cons.weights.squaredNorm(); }

double ur_penalty(const Matrix& firing, double tau) {
  if (firing.rows() == 0) throw Error(ErrorKind::EmptyTable, "empty batch");
  return (firing.colwise().mean().array() - tau).square().sum();
}

namespace {

LossBreakdown combine(double ce, double l2, double ur, const LossConfig& cfg) {
  return {ce, l2, ur, ce + cfg.alpha * l2 + cfg.lambda * ur};
}

}  // namespace

LossBreakdown total_loss(const Matrix& X, const Labels& y, const TSKModel& model, const LossConfig& cfg, Mode mode) {
  const auto cache = forward_batch(X, model, mode);
  const double tau = cfg.ur_target.resolve(model.num_rules(), model.num_classes());
  return combine(softmax_cross_entropy(cache.scores, y).loss, l2_penalty(model.consequents),
                 ur_penalty(cache.firing, tau), cfg);
}

BackwardResult backward(const Matrix& X, const Labels& y, const TSKModel& model, const LossConfig& cfg, Mode mode) {
  const auto cache = forward_batch(X, model, mode);
  const auto N = X.rows();
  const auto R = model.num_rules();
  const auto D = model.dim();
  const auto C = model.num_classes();
  const double tau = cfg.ur_target.resolve(R, C);
  const auto& ant = model.antecedents;
  const auto& cons = model.consequents;

  BackwardResult out;
  auto ce = softmax_cross_entropy(cache.scores, y);
  out.loss = combine(ce.loss, l2_penalty(cons), ur_penalty(cache.firing, tau), cfg);
  if (mode == Mode::Train) out.batch_stats = cache.stats;

  GradientBundle& g = out.grads;
  g = GradientBundle::zeros_like(model);

  // scores = sum_r firing(:, r) * rule_outputs(:, r-block)
  Matrix d_rule_outputs(N, R * C);
  Matrix d_firing(N, R);
  for (Eigen::Index r = 0; r < R; ++r) {
    const auto block = cache.rule_outputs.middleCols(r * C, C);
    d_rule_outputs.middleCols(r * C, C) = (ce.d_scores.array().colwise() * cache.firing.col(r).array()).matrix();
    d_firing.col(r) = (ce.d_scores.array() * block.array()).rowwise().sum().matrix();
  }

  if (cfg.lambda != 0.0) {
    const Eigen::RowVectorXd residual = cache.firing.colwise().mean().array() - tau;
    d_firing.rowwise() += (2.0 * cfg.lambda / double(N)) * residual;
  }

  // softmax over rules
  const Eigen::VectorXd inner = (cache.firing.array() * d_firing.array()).rowwise().sum();
  const Matrix d_log = (cache.firing.array() * (d_firing.colwise() - inner).array()).matrix();

  const Matrix& A = cache.antecedent_input;
  const bool global = model.bn_variant == BNVariant::Global;
  Matrix d_antecedent_input;
  if (global) d_antecedent_input = Matrix::Zero(N, D);
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index d = 0; d < D; ++d) {
      const double sigma = ant.spreads(r, d);
      const double s2raw = sigma * sigma;
      const double s2 = std::max(s2raw, kMinSpreadSquared);
      const bool clamped = s2raw < kMinSpreadSquared;
      double gc = 0.0;
      double gs = 0.0;
      for (Eigen::Index n = 0; n < N; ++n) {
        const double diff = A(n, d) - ant.centers(r, d);
        const double dl = d_log(n, r);
        gc += dl * diff / s2;
        gs += dl * diff * diff;
        if (global) d_antecedent_input(n, d) -= dl * diff / s2;
      }
      g.d_centers(r, d) = gc;
      g.d_spreads(r, d) = clamped ? 0.0 : gs / (s2 * sigma);
    }
  }

  for (Eigen::Index r = 0; r < R; ++r) {
    g.d_bias.row(r) = d_rule_outputs.middleCols(r * C, C).colwise().sum();
  }
  g.d_bias += 2.0 * cfg.alpha * cons.bias;

  std::vector<Matrix> d_consequent_input;
  if (cache.consequent_input.size() == 1) {
    g.d_weights.noalias() = cache.consequent_input.front().transpose() * d_rule_outputs;
    if (!model.bn.empty()) d_consequent_input.push_back(d_rule_outputs * cons.weights.transpose());
  } else {
    for (Eigen::Index r = 0; r < R; ++r) {
      const auto& Z = cache.consequent_input[std::size_t(r)];
      const auto dY = d_rule_outputs.middleCols(r * C, C);
      g.d_weights.middleCols(r * C, C).noalias() = Z.transpose() * dY;
      d_consequent_input.push_back(dY * cons.rule_weights(r).transpose());
    }
  }
  g.d_weights += 2.0 * cfg.alpha * cons.weights;

  if (global) d_consequent_input.front() += d_antecedent_input;

  // The inputs X are data, so batch statistics do not depend on any
  // parameter; only gamma and beta receive gradients through BN.
  for (std::size_t b = 0; b < model.bn.size(); ++b) {
    g.d_gamma[b] = (d_consequent_input[b].array() * cache.normalized[b].array()).colwise().sum().transpose();
    g.d_beta[b] = d_consequent_input[b].colwise().sum().transpose();
  }
  return out;
}

std::vector<std::span<double>> parameter_views(TSKModel& model) {
  auto view = [](auto& m) { return std::span<double>(m.data(), std::size_t(m.size())); };
  std::vector<std::span<double>> v{view(model.antecedents.centers), view(model.antecedents.spreads),
                                   view(model.consequents.bias), view(model.consequents.weights)};
  for (auto& b : model.bn) {
    v.push_back(view(b.gamma));
    v.push_back(view(b.beta));
  }
  return v;
}

std::vector<std::span<const double>> gradient_views(const GradientBundle& g) {
  auto view = [](const auto& m) { return std::span<const double>(m.data(), std::size_t(m.size())); };
  std::vector<std::span<const double>> v{view(g.d_centers), view(g.d_spreads), view(g.d_bias), view(g.d_weights)};
  for (std::size_t b = 0; b < g.d_gamma.size(); ++b) {
    v.push_back(view(g.d_gamma[b]));
    v.push_back(view(g.d_beta[b]));
  }
  return v;
}

}  // namespace tsk
