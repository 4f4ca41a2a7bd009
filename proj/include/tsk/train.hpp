#pragma once

#include "tsk/lossgrad.hpp"
#include "tsk/optim.hpp"
#include "tsk/rng.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace tsk {

struct TrainConfig {
  int rules = 20;
  LossConfig loss{};
  // When set, lambda is chosen from lambda_grid by cross-validation before
  // fitting; otherwise loss.lambda is used as is.
  bool select_lambda = false;
  std::vector<double> lambda_grid{0.1, 1.0, 10.0, 20.0, 50.0};
  int cv_folds = 5;
  int batch_size = 64;
  OptimizerConfig optimizer{};
  int max_epochs = 2000;
  int patience = 40;
  double subsample_fraction = 0.2;
  int subsample_runs = 5;
  BNVariant bn_variant = BNVariant::Consequent;
  std::uint64_t seed = 0;

  // Throws InvalidArgument on out-of-range settings.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double val_bca = std::numeric_limits<double>::quiet_NaN();  // NaN when not monitored
  double g_l1_antecedent = 0.0;
  double g_l1_consequent = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

// ---- initialization -------------------------------------------------------

// Lloyd's k-means with k-means++ seeding; at most 100 iterations, stops once
// no center moves more than 1e-6. An empty cluster is re-seeded at a random
// data point.
Matrix kmeans(const Matrix& X, int k, Rng& rng, int max_iter = 100, double tol = 1e-6);

// Centers from k-means on X, spreads drawn from N(1, 0.2).
Antecedents kmeans_init(const Matrix& X, int rules, std::uint64_t seed);

// Zero biases, weights drawn from U(-1, 1).
Consequents init_consequents(Eigen::Index rules, Eigen::Index dim, Eigen::Index classes, std::uint64_t seed);

TSKModel init_model(const Dataset& train, const TrainConfig& cfg, std::uint64_t seed);

// ---- epoch loop -------------------------------------------------------------

// Sizes of the mini-batches of one epoch: full batches, then the remainder
// if it has at least 2 samples.
std::vector<int> batch_plan(Eigen::Index n, int batch_size);

struct EpochStats {
  double mean_loss = 0.0;
  double g_l1_antecedent = 0.0;  // mean over batches
  double g_l1_consequent = 0.0;
  int steps = 0;
};

// One shuffled pass over data: BN running-statistic update, backward and
// optimizer step per batch.
EpochStats train_epoch(const Dataset& data, TSKModel& model, OptimizerState& opt, const TrainConfig& cfg, Rng& rng);

// ---- training runs ---------------------------------------------------------

// Patience bookkeeping on a score that should increase. A score counts as
// an improvement only if strictly above the best so far.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Returns true when training should stop after this epoch.
  bool update(int epoch, double score);
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_; }

 private:
  int patience_;
  int since_best_ = 0;
  int best_epoch_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct EarlyStopRun {
  int stop_epoch = 0;  // epoch with the best validation BCA
  int epochs_run = 0;
  double best_val_bca = 0.0;
  TrainTrace trace;
};

struct FixedRun {
  TSKModel model;
  TrainTrace trace;
};

// The unit of work the protocols are built from. Tests substitute doubles
// to count invocations.
class TrainingBackend {
 public:
  virtual ~TrainingBackend() = default;

  // Trains from a fresh initialization, monitoring validation BCA after each
  // epoch; stops after `patience` consecutive epochs without improvement or
  // at max_epochs.
  virtual EarlyStopRun train_early_stopped(const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                                           std::uint64_t seed) = 0;

  // Trains from a fresh initialization for exactly `epochs` epochs. When
  // `monitor` is given its BCA is recorded in the trace.
  virtual FixedRun train_fixed(const Dataset& train, int epochs, const TrainConfig& cfg, std::uint64_t seed,
                               const Dataset* monitor = nullptr) = 0;
};

class MbgdBackend final : public TrainingBackend {
 public:
  EarlyStopRun train_early_stopped(const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                                   std::uint64_t seed) override;
  FixedRun train_fixed(const Dataset& train, int epochs, const TrainConfig& cfg, std::uint64_t seed,
                       const Dataset* monitor = nullptr) override;
};

// Half-up rounded mean of the recorded stopping epochs.
int mean_stop_epoch(const std::vector<int>& stops);

struct EarlyStoppingFit {
  TSKModel model;
  std::vector<int> stop_epochs;
  int final_epochs = 0;
  TrainTrace trace;  // of the final run
};

// Subsample protocol: each run trains on a random subsample_fraction of the
// training set (at least 2 * batch_size samples) and validates on the rest;
// the final model is trained on the whole set for the mean stopping epoch.
EarlyStoppingFit fit_early_stopping(const Dataset& train, const TrainConfig& cfg, TrainingBackend& backend);
EarlyStoppingFit fit_early_stopping(const Dataset& train, const TrainConfig& cfg);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> mean_val_bca;  // per grid entry
};

// k-fold cross-validation over the grid; maximizes mean validation BCA,
// ties go to the smaller lambda.
LambdaSelection select_lambda_cv(const Dataset& train, const std::vector<double>& grid, const TrainConfig& cfg,
                                 TrainingBackend& backend);

struct FitOutcome {
  EarlyStoppingFit fit;
  double lambda = 0.0;
  std::vector<double> cv_scores;  // empty when lambda was not selected
};

// Lambda selection (if enabled) followed by fit_early_stopping.
FitOutcome fit(const Dataset& train, const TrainConfig& cfg, TrainingBackend& backend);
FitOutcome fit(const Dataset& train, const TrainConfig& cfg);

}  // namespace tsk
