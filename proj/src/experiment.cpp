#include "tsk/experiment.hpp"

#include "tsk/error.hpp"
#include "tsk/serialize.hpp"
#include "tsk/stats.hpp"
#include "tsk/synthetic.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <thread>

namespace tsk {

using nlohmann::json;

namespace {

struct AlgorithmInfo {
  Algorithm algorithm;
  std::string_view name;
  bool ur;
  BNVariant bn;
};

constexpr AlgorithmInfo kAlgorithms[] = {
    {Algorithm::Mbgd, "MBGD", false, BNVariant::None},
    {Algorithm::MbgdBn, "MBGD-BN", false, BNVariant::Consequent},
    {Algorithm::MbgdUr, "MBGD-UR", true, BNVariant::None},
    {Algorithm::MbgdUrBn, "MBGD-UR-BN", true, BNVariant::Consequent},
    {Algorithm::MbgdUrGbn, "MBGD-UR-GBN", true, BNVariant::Global},
    {Algorithm::MbgdUrRbn, "MBGD-UR-RBN", true, BNVariant::RuleSpecific},
};

const AlgorithmInfo& info(Algorithm a) {
  for (const auto& i : kAlgorithms)
    if (i.algorithm == a) return i;
  return kAlgorithms[0];
}

enum SeedStream : std::uint64_t { kSplitStream = 11, kTrainStream = 12 };

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string_view to_string(Algorithm a) { return info(a).name; }

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& i : kAlgorithms)
    if (i.name == name) return i.algorithm;
  throw Error(ErrorKind::InvalidArgument, "unknown variant '" + std::string(name) + "'",
              {{"flag", "--variant"},
               {"value", std::string(name)},
               {"expected", "MBGD|MBGD-BN|MBGD-UR|MBGD-UR-BN|MBGD-UR-GBN|MBGD-UR-RBN"}});
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = [] {
    std::vector<Algorithm> v;
    for (const auto& i : kAlgorithms) v.push_back(i.algorithm);
    return v;
  }();
  return all;
}

bool uses_ur(Algorithm a) { return info(a).ur; }
BNVariant bn_of(Algorithm a) { return info(a).bn; }

DataSource make_source(const std::string& path, const std::string& label_column,
                       const std::vector<std::string>& categorical_columns) {
  DataSource s;
  s.path = path;
  s.label_column = label_column;
  s.categorical_columns = categorical_columns;
  if (path.rfind(kSyntheticPrefix, 0) == 0) {
    s.name = path.substr(kSyntheticPrefix.size());
  } else {
    s.name = std::filesystem::path(path).stem().string();
  }
  return s;
}

Encoded load_source(const DataSource& src) {
  if (src.path.rfind(kSyntheticPrefix, 0) == 0) {
    const auto name = src.path.substr(kSyntheticPrefix.size());
    return generate_mixture(synthetic_spec(name), 2020);
  }
  return encode(load_csv(src.path, src.label_column, src.categorical_columns));
}

void ExperimentSpec::validate() const {
  if (datasets.empty()) throw Error(ErrorKind::InvalidArgument, "no dataset given", {{"flag", "--data"}});
  if (algorithms.empty()) throw Error(ErrorKind::InvalidArgument, "no variant given", {{"flag", "--variant"}});
  if (splits < 1) throw Error(ErrorKind::InvalidArgument, "need at least one split", {{"flag", "--splits"}});
  if (jobs < 1) throw Error(ErrorKind::InvalidArgument, "jobs must be positive", {{"flag", "--jobs"}});
  for (auto a : algorithms) config_for(a, *this).validate();
}

TrainConfig config_for(Algorithm a, const ExperimentSpec& spec) {
  TrainConfig c = spec.base;
  c.bn_variant = bn_of(a);
  if (uses_ur(a)) {
    c.select_lambda = spec.lambda_cv;
  } else {
    c.select_lambda = false;
    c.loss.lambda = 0.0;
  }
  return c;
}

std::uint64_t split_seed(std::uint64_t master, std::size_t dataset, int split) {
  return derive_seed(master, kSplitStream, dataset, split);
}

std::uint64_t train_seed(std::uint64_t master, std::size_t dataset, int split) {
  return derive_seed(master, kTrainStream, dataset, split);
}

RunRecord run_split(const Dataset& data, Algorithm algorithm, const TrainConfig& cfg, std::uint64_t seed) {
  RunRecord rec;
  rec.algorithm = algorithm;
  try {
    auto split = split_70_30(data, seed);
    standardize(split);
    auto outcome = fit(split.train, cfg);
    rec.metrics = evaluate(outcome.fit.model, split.test);
    const auto diag = firing_diagnostics(outcome.fit.model, split.test.X);
    rec.firing_variance = diag.firing_variance();
    rec.mean_entropy = diag.mean_entropy();
    rec.lambda = outcome.lambda;
    rec.stop_epochs = outcome.fit.stop_epochs;
    rec.final_epochs = outcome.fit.final_epochs;
    rec.ok = true;
  } catch (const Error& e) {
    rec.error = fmt::format("{}: {}", to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    rec.error = fmt::format("Internal: {}", e.what());
  }
  return rec;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(std::size_t(jobs), count);
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

ExperimentReport run_benchmark(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  report.spec = spec;

  std::vector<Dataset> data;
  for (const auto& src : spec.datasets) {
    data.push_back(make_dataset(load_source(src)));
    report.dataset_names.push_back(src.name);
  }

  const std::size_t A = spec.algorithms.size();
  const std::size_t S = std::size_t(spec.splits);
  report.runs.resize(data.size() * S * A);
  parallel_for(report.runs.size(), spec.jobs, [&](std::size_t i) {
    const std::size_t a = i % A;
    const std::size_t s = (i / A) % S;
    const std::size_t d = i / (A * S);
    const auto alg = spec.algorithms[a];
    TrainConfig cfg = config_for(alg, spec);
    cfg.seed = train_seed(spec.seed, d, int(s));
    auto rec = run_split(data[d], alg, cfg, split_seed(spec.seed, d, int(s)));
    rec.dataset = d;
    rec.split = int(s);
    report.runs[i] = std::move(rec);
  });
  report.aggregates = aggregate(report.runs, data.size(), spec.algorithms);
  return report;
}

std::vector<Aggregate> aggregate(const std::vector<RunRecord>& runs, std::size_t num_datasets,
                                 const std::vector<Algorithm>& algorithms) {
  std::vector<Aggregate> out;
  for (std::size_t d = 0; d < num_datasets; ++d) {
    for (auto alg : algorithms) {
      Aggregate agg;
      agg.algorithm = alg;
      agg.dataset = d;
      std::vector<double> rca, bca;
      for (const auto& r : runs) {
        if (r.ok && r.dataset == d && r.algorithm == alg) {
          rca.push_back(r.metrics.rca);
          bca.push_back(r.metrics.bca);
        }
      }
      agg.runs = int(rca.size());
      auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
        if (v.empty()) return {std::nan(""), std::nan("")};
        double m = 0.0;
        for (double x : v) m += x;
        m /= double(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return {m, std::sqrt(s / double(v.size()))};
      };
      std::tie(agg.mean_rca, agg.std_rca) = mean_std(rca);
      std::tie(agg.mean_bca, agg.std_bca) = mean_std(bca);
      out.push_back(agg);
    }
  }
  return out;
}

namespace {

json config_json(const ExperimentSpec& spec) {
  const auto& b = spec.base;
  const auto& o = b.optimizer;
  json grid = b.lambda_grid;
  return {{"rules", b.rules},
          {"alpha", b.loss.alpha},
          {"lambda_selection", spec.lambda_cv ? "cross-validation" : "fixed"},
          {"lambda", b.loss.lambda},
          {"lambda_grid", grid},
          {"cv_folds", b.cv_folds},
          {"ur_target", b.loss.ur_target.describe()},
          {"batch_size", b.batch_size},
          {"max_epochs", b.max_epochs},
          {"patience", b.patience},
          {"subsample_fraction", b.subsample_fraction},
          {"subsample_runs", b.subsample_runs},
          {"early_stopping_metric", "validation BCA"},
          {"optimizer",
           {{"kind", to_string(o.kind)},
            {"lr", o.lr},
            {"beta1", o.beta1},
            {"beta2", o.beta2},
            {"eps", o.eps},
            {"momentum", o.momentum},
            {"final_lr", o.final_lr},
            {"bound_speed", o.bound_speed}}},
          {"splits", spec.splits},
          {"seed", spec.seed}};
}

// mean scores, algorithms x datasets; NaN where no run succeeded
Eigen::MatrixXd score_matrix(const ExperimentReport& r, bool bca) {
  const auto A = Eigen::Index(r.spec.algorithms.size());
  const auto D = Eigen::Index(r.dataset_names.size());
  Eigen::MatrixXd m(A, D);
  for (const auto& agg : r.aggregates) {
    Eigen::Index a = 0;
    while (r.spec.algorithms[std::size_t(a)] != agg.algorithm) ++a;
    m(a, Eigen::Index(agg.dataset)) = bca ? agg.mean_bca : agg.mean_rca;
  }
  return m;
}

json comparison_json(const ExperimentReport& r, bool bca) {
  const Eigen::MatrixXd scores = score_matrix(r, bca);
  json out;
  if (!scores.allFinite()) {
    out["applicable"] = false;
    out["reason"] = "some algorithm has no successful run on some dataset";
    return out;
  }
  const Eigen::MatrixXd ranks = rank_per_dataset(scores);
  json table = json::array();
  for (Eigen::Index a = 0; a < ranks.rows(); ++a) {
    json row = {{"algorithm", to_string(r.spec.algorithms[std::size_t(a)])}};
    json per = json::object();
    for (Eigen::Index d = 0; d < ranks.cols(); ++d) per[r.dataset_names[std::size_t(d)]] = ranks(a, d);
    row["ranks"] = std::move(per);
    row["mean_rank"] = ranks.row(a).mean();
    table.push_back(std::move(row));
  }
  out["ranks"] = std::move(table);
  try {
    const auto dunn = dunn_fdr(scores);
    json cmp = json::array();
    for (const auto& c : dunn.comparisons) {
      cmp.push_back({{"first", to_string(r.spec.algorithms[std::size_t(c.first)])},
                     {"second", to_string(r.spec.algorithms[std::size_t(c.second)])},
                     {"z", c.z},
                     {"p_raw", c.p_raw},
                     {"p_adjusted", c.p_adjusted}});
    }
    out["applicable"] = true;
    out["dunn"] = std::move(cmp);
  } catch (const Error& e) {
    out["applicable"] = false;
    out["reason"] = e.what();
  }
  return out;
}

}  // namespace

json report_json(const ExperimentReport& r) {
  json runs = json::array();
  json failures = json::array();
  for (const auto& rec : r.runs) {
    json j = {{"algorithm", to_string(rec.algorithm)},
              {"dataset", r.dataset_names[rec.dataset]},
              {"split", rec.split},
              {"status", rec.ok ? "ok" : "failed"}};
    if (rec.ok) {
      j["rca"] = rec.metrics.rca;
      j["bca"] = rec.metrics.bca;
      j["confusion"] = rec.metrics.confusion;
      j["absent_classes"] = rec.metrics.absent_classes;
      j["lambda"] = rec.lambda;
      j["stop_epochs"] = rec.stop_epochs;
      j["final_epochs"] = rec.final_epochs;
      j["firing_variance"] = rec.firing_variance;
      j["mean_entropy"] = rec.mean_entropy;
    } else {
      j["error"] = rec.error;
      failures.push_back({{"algorithm", to_string(rec.algorithm)},
                          {"dataset", r.dataset_names[rec.dataset]},
                          {"split", rec.split},
                          {"error", rec.error}});
    }
    runs.push_back(std::move(j));
  }
  json aggs = json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"algorithm", to_string(a.algorithm)},
                    {"dataset", r.dataset_names[a.dataset]},
                    {"runs", a.runs},
                    {"mean_rca", nullable(a.mean_rca)},
                    {"std_rca", nullable(a.std_rca)},
                    {"mean_bca", nullable(a.mean_bca)},
                    {"std_bca", nullable(a.std_bca)}});
  }
  json algs = json::array();
  for (auto a : r.spec.algorithms) algs.push_back(to_string(a));
  return {{"config", config_json(r.spec)},
          {"datasets", r.dataset_names},
          {"algorithms", std::move(algs)},
          {"runs", std::move(runs)},
          {"aggregates", std::move(aggs)},
          {"comparison",
           {{"input", "per-dataset mean scores over splits"},
            {"rca", comparison_json(r, false)},
            {"bca", comparison_json(r, true)}}},
          {"failures", std::move(failures)}};
}

std::string results_csv(const ExperimentReport& r) {
  std::string out = "algorithm,dataset,split,status,rca,bca,lambda,final_epochs,firing_variance,mean_entropy\n";
  for (const auto& rec : r.runs) {
    if (rec.ok) {
      out += fmt::format("{},{},{},ok,{},{},{},{},{},{}\n", to_string(rec.algorithm), r.dataset_names[rec.dataset],
                         rec.split, format_real(rec.metrics.rca), format_real(rec.metrics.bca),
                         format_real(rec.lambda), rec.final_epochs, format_real(rec.firing_variance),
                         format_real(rec.mean_entropy));
    } else {
      out += fmt::format("{},{},{},failed,,,,,,\n", to_string(rec.algorithm), r.dataset_names[rec.dataset], rec.split);
    }
  }
  return out;
}

std::vector<SweepRow> sweep_batch(const ExperimentSpec& spec, const std::vector<int>& sizes) {
  spec.validate();
  const auto data = make_dataset(load_source(spec.datasets.front()));
  const auto alg = spec.algorithms.front();
  const auto n_train = (data.size() * 7) / 10;

  std::vector<SweepRow> rows(sizes.size());
  std::vector<RunRecord> runs(sizes.size() * std::size_t(spec.splits));
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    rows[i].batch_size = sizes[i];
    if (sizes[i] < 2 || sizes[i] > n_train) {
      rows[i].skipped = true;
      rows[i].note = fmt::format("batch size outside [2, {}]", n_train);
    }
  }
  parallel_for(runs.size(), spec.jobs, [&](std::size_t i) {
    const std::size_t k = i / std::size_t(spec.splits);
    const int s = int(i % std::size_t(spec.splits));
    if (rows[k].skipped) return;
    TrainConfig cfg = config_for(alg, spec);
    cfg.batch_size = sizes[k];
    cfg.seed = train_seed(spec.seed, 0, s);
    runs[i] = run_split(data, alg, cfg, split_seed(spec.seed, 0, s));
  });
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].skipped) continue;
    int failed = 0;
    for (int s = 0; s < spec.splits; ++s) {
      const auto& r = runs[k * std::size_t(spec.splits) + std::size_t(s)];
      if (!r.ok) {
        ++failed;
        continue;
      }
      rows[k].mean_rca += r.metrics.rca;
      rows[k].mean_bca += r.metrics.bca;
      ++rows[k].runs;
    }
    if (rows[k].runs) {
      rows[k].mean_rca /= rows[k].runs;
      rows[k].mean_bca /= rows[k].runs;
    } else {
      rows[k].mean_rca = rows[k].mean_bca = std::nan("");
    }
    if (failed) rows[k].note = fmt::format("{} failed runs", failed);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "batch_size,status,runs,mean_rca,mean_bca,note\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.batch_size, r.skipped ? "skipped" : "ok", r.runs,
                       r.skipped ? "" : format_real(r.mean_rca), r.skipped ? "" : format_real(r.mean_bca), r.note);
  }
  return out;
}

}  // namespace tsk
