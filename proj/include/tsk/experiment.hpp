#pragma once

#include "tsk/data.hpp"
#include "tsk/eval.hpp"
#include "tsk/train.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tsk {

enum class Algorithm { Mbgd, MbgdBn, MbgdUr, MbgdUrBn, MbgdUrGbn, MbgdUrRbn };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);
const std::vector<Algorithm>& all_algorithms();
bool uses_ur(Algorithm a);
BNVariant bn_of(Algorithm a);

// A CSV file or "synthetic:<preset>".
struct DataSource {
  std::string name;
  std::string path;
  std::string label_column = "label";
  std::vector<std::string> categorical_columns;
};

inline constexpr std::string_view kSyntheticPrefix = "synthetic:";

DataSource make_source(const std::string& path, const std::string& label_column,
                       const std::vector<std::string>& categorical_columns);
Encoded load_source(const DataSource& src);

struct ExperimentSpec {
  std::vector<DataSource> datasets;
  std::vector<Algorithm> algorithms;
  TrainConfig base;
  // UR variants: pick lambda by cross-validation over base.lambda_grid, or
  // use base.loss.lambda as given.
  bool lambda_cv = true;
  int splits = 30;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

// Training config actually used for one algorithm.
TrainConfig config_for(Algorithm a, const ExperimentSpec& spec);

std::uint64_t split_seed(std::uint64_t master, std::size_t dataset, int split);
std::uint64_t train_seed(std::uint64_t master, std::size_t dataset, int split);

struct RunRecord {
  Algorithm algorithm = Algorithm::Mbgd;
  std::size_t dataset = 0;
  int split = 0;
  bool ok = false;
  std::string error;  // "<Kind>: message" when !ok
  Metrics metrics;
  double lambda = 0.0;
  std::vector<int> stop_epochs;
  int final_epochs = 0;
  double firing_variance = 0.0;
  double mean_entropy = 0.0;
};

struct Aggregate {
  Algorithm algorithm = Algorithm::Mbgd;
  std::size_t dataset = 0;
  int runs = 0;  // successful ones
  double mean_rca = 0.0, std_rca = 0.0;
  double mean_bca = 0.0, std_bca = 0.0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<std::string> dataset_names;
  std::vector<RunRecord> runs;  // dataset, split, algorithm order
  std::vector<Aggregate> aggregates;
};

// Train and test one algorithm on one 70/30 split of `data`.
RunRecord run_split(const Dataset& data, Algorithm algorithm, const TrainConfig& cfg, std::uint64_t split_seed);

// All datasets x splits x algorithms; failures are recorded, not thrown.
// Results do not depend on spec.jobs.
ExperimentReport run_benchmark(const ExperimentSpec& spec);

// Population mean / std over the successful runs.
std::vector<Aggregate> aggregate(const std::vector<RunRecord>& runs, std::size_t num_datasets,
                                 const std::vector<Algorithm>& algorithms);

nlohmann::json report_json(const ExperimentReport& report);
// algorithm,dataset,split,status,rca,bca,lambda,final_epochs,firing_variance,mean_entropy
std::string results_csv(const ExperimentReport& report);

struct SweepRow {
  int batch_size = 0;
  bool skipped = false;
  int runs = 0;
  double mean_rca = 0.0;
  double mean_bca = 0.0;
  std::string note;
};

// One curve point per batch size, each averaged over spec.splits splits of
// the first dataset with the first algorithm.
std::vector<SweepRow> sweep_batch(const ExperimentSpec& spec, const std::vector<int>& sizes);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Runs fn(0..count-1) on `jobs` threads; each index exactly once.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace tsk
