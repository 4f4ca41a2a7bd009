#include "tsk/train.hpp"

#include "tsk/error.hpp"
#include "tsk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsk {

namespace {

// Stream identifiers for derive_seed.
enum Stream : std::uint64_t {
  kInitAntecedents = 1,
  kInitConsequents,
  kShuffle,
  kSubsample,
  kSubsampleRun,
  kFinalRun,
  kFolds,
  kFoldRun,
};

void invalid(const std::string& flag, const std::string& msg) {
  throw Error(ErrorKind::InvalidArgument, msg, {{"flag", flag}});
}

}  // namespace

void TrainConfig::validate() const {
  if (rules < 1) invalid("--rules", "rule count must be positive");
  if (batch_size < 2) invalid("--batch-size", "batch size must be at least 2");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    invalid("--subsample-fraction", "subsample fraction must be in (0, 1]");
  }
  if (max_epochs < 1) invalid("--max-epochs", "max epochs must be positive");
  if (patience < 1 || patience >= max_epochs) invalid("--patience", "patience must be in [1, max_epochs)");
  if (subsample_runs < 1) invalid("--subsample-runs", "need at least one subsample run");
  if (loss.alpha < 0.0) invalid("--alpha", "alpha must be non-negative");
  if (loss.lambda < 0.0) invalid("--lambda", "lambda must be non-negative");
  if (select_lambda) {
    if (lambda_grid.empty()) invalid("--lambda-grid", "lambda grid is empty");
    for (double l : lambda_grid)
      if (l < 0.0) invalid("--lambda-grid", "lambda grid values must be non-negative");
    if (cv_folds < 2) invalid("--cv-folds", "cross-validation needs at least 2 folds");
  }
  if (!(optimizer.lr >= 0.0)) invalid("--lr", "learning rate must be non-negative");
}

// ---- initialization ----------------------------------------------------------

Matrix kmeans(const Matrix& X, int k, Rng& rng, int max_iter, double tol) {
  const auto N = X.rows();
  if (k < 1 || N < k) {
    throw Error(ErrorKind::TooFewSamples, "k-means needs at least as many samples as clusters",
                {{"n", std::to_string(N)}, {"k", std::to_string(k)}});
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_index = [&] { return std::uniform_int_distribution<Eigen::Index>(0, N - 1)(rng); };

  // k-means++ seeding
  Matrix centers(k, X.cols());
  centers.row(0) = X.row(random_index());
  Vector dist2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = unif(rng) * total;
      double acc = 0.0;
      pick = N - 1;
      for (Eigen::Index n = 0; n < N; ++n) {
        acc += dist2(n);
        if (acc > target && dist2(n) > 0.0) {
          pick = n;
          break;
        }
      }
    } else {
      pick = random_index();
    }
    centers.row(c) = X.row(pick);
    dist2 = dist2.cwiseMin((X.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(std::size_t(N), 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    // ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 term does not affect the argmin.
    const Matrix cross = X * centers.transpose();
    const Vector cnorm = centers.rowwise().squaredNorm();
    for (Eigen::Index n = 0; n < N; ++n) {
      int best = 0;
      double best_d = cnorm(0) - 2.0 * cross(n, 0);
      for (int c = 1; c < k; ++c) {
        const double d = cnorm(c) - 2.0 * cross(n, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[std::size_t(n)] = best;
    }
    Matrix next = Matrix::Zero(k, X.cols());
    std::vector<Eigen::Index> count(std::size_t(k), 0);
    for (Eigen::Index n = 0; n < N; ++n) {
      next.row(assign[std::size_t(n)]) += X.row(n);
      ++count[std::size_t(assign[std::size_t(n)])];
    }
    for (int c = 0; c < k; ++c) {
      if (count[std::size_t(c)] == 0) {
        next.row(c) = X.row(random_index());
      } else {
        next.row(c) /= double(count[std::size_t(c)]);
      }
    }
    const double shift = (next - centers).rowwise().norm().maxCoeff();
    centers = std::move(next);
    if (shift <= tol) break;
  }
  return centers;
}

Antecedents kmeans_init(const Matrix& X, int rules, std::uint64_t seed) {
  auto rng = make_rng(seed);
  Antecedents ant;
  ant.centers = kmeans(X, rules, rng);
  std::normal_distribution<double> spread(1.0, 0.2);
  ant.spreads.resize(rules, X.cols());
  for (Eigen::Index r = 0; r < ant.spreads.rows(); ++r)
    for (Eigen::Index d = 0; d < ant.spreads.cols(); ++d) ant.spreads(r, d) = spread(rng);
  return ant;
}

Consequents init_consequents(Eigen::Index rules, Eigen::Index dim, Eigen::Index classes, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Consequents cons = Consequents::zeros(rules, dim, classes);
  for (Eigen::Index r = 0; r < rules; ++r)
    for (Eigen::Index d = 0; d < dim; ++d)
      for (Eigen::Index c = 0; c < classes; ++c) cons.weight(r, d, c) = unif(rng);
  return cons;
}

TSKModel init_model(const Dataset& train, const TrainConfig& cfg, std::uint64_t seed) {
  TSKModel model = TSKModel::zeros(cfg.rules, train.dim(), train.num_classes, cfg.bn_variant);
  model.antecedents = kmeans_init(train.X, cfg.rules, derive_seed(seed, kInitAntecedents));
  model.consequents = init_consequents(cfg.rules, train.dim(), train.num_classes, derive_seed(seed, kInitConsequents));
  return model;
}

// ---- epoch loop -----------------------------------------------------------------

std::vector<int> batch_plan(Eigen::Index n, int batch_size) {
  std::vector<int> plan(std::size_t(n / batch_size), batch_size);
  const auto rest = int(n % batch_size);
  if (rest >= 2) plan.push_back(rest);
  return plan;
}

EpochStats train_epoch(const Dataset& data, TSKModel& model, OptimizerState& opt, const TrainConfig& cfg, Rng& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::shuffle(order.begin(), order.end(), rng);

  EpochStats stats;
  Matrix Xb;
  Labels yb;
  std::size_t offset = 0;
  const auto params = parameter_views(model);
  for (int size : batch_plan(data.size(), cfg.batch_size)) {
    Xb.resize(size, data.dim());
    yb.resize(std::size_t(size));
    for (int i = 0; i < size; ++i) {
      const auto idx = order[offset + std::size_t(i)];
      Xb.row(i) = data.X.row(idx);
      yb[std::size_t(i)] = data.y[std::size_t(idx)];
    }
    offset += std::size_t(size);

    auto result = backward(Xb, yb, model, cfg.loss, Mode::Train);
    if (!std::isfinite(result.loss.total) || !result.grads.all_finite()) {
      throw Error(ErrorKind::NumericFailure, "training produced a non-finite loss or gradient",
                  {{"step", std::to_string(opt.t)}});
    }
    for (std::size_t b = 0; b < model.bn.size(); ++b) update_running_stats(model.bn[b], result.batch_stats[b]);
    optimizer_step(opt, params, gradient_views(result.grads));

    stats.mean_loss += result.loss.total;
    stats.g_l1_antecedent += result.grads.l1_antecedent();
    stats.g_l1_consequent += result.grads.l1_consequent();
    ++stats.steps;
  }
  if (stats.steps > 0) {
    stats.mean_loss /= stats.steps;
    stats.g_l1_antecedent /= stats.steps;
    stats.g_l1_consequent /= stats.steps;
  }
  return stats;
}

bool EarlyStopper::update(int epoch, double score) {
  if (score > best_) {
    best_ = score;
    best_epoch_ = epoch;
    since_best_ = 0;
    return false;
  }
  return ++since_best_ >= patience_;
}

// ---- training runs --------------------------------------------------------------

EarlyStopRun MbgdBackend::train_early_stopped(const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                                              std::uint64_t seed) {
  TSKModel model = init_model(train, cfg, seed);
  OptimizerState opt(cfg.optimizer);
  auto rng = make_rng(derive_seed(seed, kShuffle));

  EarlyStopRun run;
  EarlyStopper stopper(cfg.patience);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto stats = train_epoch(train, model, opt, cfg, rng);
    const double bca = evaluate(model, val).bca;
    run.trace.epochs.push_back({epoch, stats.mean_loss, bca, stats.g_l1_antecedent, stats.g_l1_consequent});
    run.epochs_run = epoch;
    if (stopper.update(epoch, bca)) break;
  }
  run.stop_epoch = stopper.best_epoch();
  run.best_val_bca = stopper.best_score();
  return run;
}

FixedRun MbgdBackend::train_fixed(const Dataset& train, int epochs, const TrainConfig& cfg, std::uint64_t seed,
                                  const Dataset* monitor) {
  FixedRun run{init_model(train, cfg, seed), {}};
  OptimizerState opt(cfg.optimizer);
  auto rng = make_rng(derive_seed(seed, kShuffle));
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const auto stats = train_epoch(train, run.model, opt, cfg, rng);
    EpochRecord rec{epoch, stats.mean_loss, std::numeric_limits<double>::quiet_NaN(), stats.g_l1_antecedent,
                    stats.g_l1_consequent};
    if (monitor) rec.val_bca = evaluate(run.model, *monitor).bca;
    run.trace.epochs.push_back(rec);
  }
  return run;
}

int mean_stop_epoch(const std::vector<int>& stops) {
  if (stops.empty()) throw Error(ErrorKind::InvalidArgument, "no stopping epochs recorded");
  const long long sum = std::accumulate(stops.begin(), stops.end(), 0LL);
  const auto n = static_cast<long long>(stops.size());
  return int((2 * sum + n) / (2 * n));
}

EarlyStoppingFit fit_early_stopping(const Dataset& train, const TrainConfig& cfg, TrainingBackend& backend) {
  cfg.validate();
  const auto N = train.size();
  if (N < 3) throw Error(ErrorKind::TooFewSamples, "training set too small for the subsample protocol");

  auto n_sub = Eigen::Index(std::llround(cfg.subsample_fraction * double(N)));
  n_sub = std::max<Eigen::Index>(n_sub, 2 * Eigen::Index(cfg.batch_size));
  n_sub = std::clamp<Eigen::Index>(n_sub, 2, N - 1);

  EarlyStoppingFit out;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  for (int run = 0; run < cfg.subsample_runs; ++run) {
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    auto rng = make_rng(derive_seed(cfg.seed, kSubsample, run));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Eigen::Index> sub(order.begin(), order.begin() + n_sub);
    std::vector<Eigen::Index> rest(order.begin() + n_sub, order.end());
    std::sort(sub.begin(), sub.end());
    std::sort(rest.begin(), rest.end());
    const auto result = backend.train_early_stopped(train.subset(sub), train.subset(rest), cfg,
                                                    derive_seed(cfg.seed, kSubsampleRun, run));
    out.stop_epochs.push_back(std::min(result.stop_epoch, cfg.max_epochs));
  }
  out.final_epochs = std::clamp(mean_stop_epoch(out.stop_epochs), 1, cfg.max_epochs);
  auto final_run = backend.train_fixed(train, out.final_epochs, cfg, derive_seed(cfg.seed, kFinalRun));
  out.model = std::move(final_run.model);
  out.trace = std::move(final_run.trace);
  return out;
}

EarlyStoppingFit fit_early_stopping(const Dataset& train, const TrainConfig& cfg) {
  MbgdBackend backend;
  return fit_early_stopping(train, cfg, backend);
}

LambdaSelection select_lambda_cv(const Dataset& train, const std::vector<double>& grid, const TrainConfig& cfg,
                                 TrainingBackend& backend) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "lambda grid is empty", {{"flag", "--lambda-grid"}});
  const int k = cfg.cv_folds;
  const auto N = train.size();
  if (N < 2 * k) throw Error(ErrorKind::TooFewSamples, "too few samples for cross-validation");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  auto rng = make_rng(derive_seed(cfg.seed, kFolds));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Dataset> fold_train, fold_val;
  for (int f = 0; f < k; ++f) {
    const auto lo = std::size_t(N * f / k);
    const auto hi = std::size_t(N * (f + 1) / k);
    std::vector<Eigen::Index> val(order.begin() + std::ptrdiff_t(lo), order.begin() + std::ptrdiff_t(hi));
    std::vector<Eigen::Index> tr(order.begin(), order.begin() + std::ptrdiff_t(lo));
    tr.insert(tr.end(), order.begin() + std::ptrdiff_t(hi), order.end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());
    fold_train.push_back(train.subset(tr));
    fold_val.push_back(train.subset(val));
  }

  LambdaSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    TrainConfig c = cfg;
    c.loss.lambda = lambda;
    double sum = 0.0;
    for (int f = 0; f < k; ++f) {
      sum += backend.train_early_stopped(fold_train[std::size_t(f)], fold_val[std::size_t(f)], c,
                                         derive_seed(cfg.seed, kFoldRun, f))
                 .best_val_bca;
    }
    const double mean = sum / k;
    sel.mean_val_bca.push_back(mean);
    if (mean > best || (mean == best && lambda < sel.lambda)) {
      best = mean;
      sel.lambda = lambda;
    }
  }
  return sel;
}

FitOutcome fit(const Dataset& train, const TrainConfig& cfg, TrainingBackend& backend) {
  cfg.validate();
  FitOutcome out;
  TrainConfig c = cfg;
  if (cfg.select_lambda) {
    auto sel = select_lambda_cv(train, cfg.lambda_grid, cfg, backend);
    c.loss.lambda = sel.lambda;
    out.cv_scores = std::move(sel.mean_val_bca);
  }
  out.lambda = c.loss.lambda;
  out.fit = fit_early_stopping(train, c, backend);
  return out;
}

FitOutcome fit(const Dataset& train, const TrainConfig& cfg) {
  MbgdBackend backend;
  return fit(train, cfg, backend);
}

}  // namespace tsk
