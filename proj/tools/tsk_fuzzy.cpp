// tsk-fuzzy: train, evaluate, benchmark and inspect TSK fuzzy classifiers.
#include "tsk/batchnorm.hpp"
#include "tsk/error.hpp"
#include "tsk/eval.hpp"
#include "tsk/experiment.hpp"
#include "tsk/serialize.hpp"
#include "tsk/synthetic.hpp"
#include "tsk/train.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tsk;

namespace {

struct Options {
  std::string data;
  std::vector<std::string> datasets;
  std::string label_col;
  std::vector<std::string> categorical_cols;
  std::vector<std::string> variants;
  int rules = 20;
  double alpha = 0.05;
  double lambda = 0.0;
  std::vector<double> lambda_grid{0.1, 1.0, 10.0, 20.0, 50.0};
  std::string ur_target = "1/R";
  std::string bn;
  int batch_size = 64;
  double lr = 0.01;
  std::string optimizer = "adabound";
  int max_epochs = 2000;
  int patience = 40;
  int splits = 30;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  std::string model;
  bool holdout = false;
  int bins = 20;
  std::vector<int> sizes{16, 32, 64, 128, 256, 512, 1024, 2048};
  std::string name;

  std::vector<CLI::Option*> lambda_opts;  // one per subcommand
};

void add_data_flags(CLI::App* app, Options& o) {
  app->add_option("--data", o.data, "CSV file or synthetic:<preset>");
  app->add_option("--label-col", o.label_col, "Name of the label column");
  app->add_option("--categorical-cols", o.categorical_cols, "Comma separated categorical columns")->delimiter(',');
}

void add_train_flags(CLI::App* app, Options& o) {
  app->add_option("--rules", o.rules, "Number of rules")->capture_default_str();
  app->add_option("--alpha", o.alpha, "L2 weight on consequent parameters")->capture_default_str();
  auto* lam = app->add_option("--lambda", o.lambda, "Fixed UR weight (skips cross-validation)");
  o.lambda_opts.push_back(lam);
  app->add_option("--lambda-grid", o.lambda_grid, "Cross-validation grid for the UR weight")
      ->delimiter(',')
      ->excludes(lam)
      ->capture_default_str();
  app->add_option("--ur-target", o.ur_target, "UR target: 1/R, 1/C or a value in (0, 1]")->capture_default_str();
  app->add_option("--batch-size", o.batch_size, "Mini-batch size")->capture_default_str();
  app->add_option("--lr", o.lr, "Initial learning rate")->capture_default_str();
  app->add_option("--optimizer", o.optimizer, "adabound, adam or sgd")->capture_default_str();
  app->add_option("--max-epochs", o.max_epochs, "Epoch cap")->capture_default_str();
  app->add_option("--patience", o.patience, "Early-stopping patience")->capture_default_str();
  app->add_option("--seed", o.seed, "Master seed")->capture_default_str();
}

TrainConfig train_config(const Options& o) {
  TrainConfig c;
  c.rules = o.rules;
  c.loss.alpha = o.alpha;
  c.loss.lambda = o.lambda;
  c.loss.ur_target = UrTarget::parse(o.ur_target);
  c.lambda_grid = o.lambda_grid;
  c.batch_size = o.batch_size;
  c.optimizer.kind = parse_optimizer(o.optimizer);
  c.optimizer.lr = o.lr;
  c.max_epochs = o.max_epochs;
  c.patience = o.patience;
  c.seed = o.seed;
  return c;
}

bool lambda_fixed(const Options& o) {
  for (auto* opt : o.lambda_opts)
    if (opt->count() > 0) return true;
  return false;
}

DataSource source_for(const std::string& path, const Options& o) {
  if (path.empty()) throw Error(ErrorKind::InvalidArgument, "--data is required", {{"flag", "--data"}});
  const bool synthetic = path.rfind(kSyntheticPrefix, 0) == 0;
  if (!synthetic && o.label_col.empty()) {
    throw Error(ErrorKind::InvalidArgument, "--label-col is required for CSV data", {{"flag", "--label-col"}});
  }
  return make_source(path, synthetic ? "label" : o.label_col, o.categorical_cols);
}

ExperimentSpec experiment_spec(const Options& o, const std::vector<std::string>& paths) {
  ExperimentSpec spec;
  for (const auto& p : paths) spec.datasets.push_back(source_for(p, o));
  if (o.variants.empty()) {
    spec.algorithms = all_algorithms();
  } else {
    for (const auto& v : o.variants) spec.algorithms.push_back(parse_algorithm(v));
  }
  spec.base = train_config(o);
  spec.lambda_cv = !lambda_fixed(o);
  spec.splits = o.splits;
  spec.seed = o.seed;
  spec.jobs = o.jobs;
  return spec;
}

json metrics_json(const Metrics& m) {
  return {{"rca", m.rca}, {"bca", m.bca}, {"confusion", m.confusion}, {"absent_classes", m.absent_classes}};
}

fs::path out_dir(const Options& o) { return o.out.empty() ? fs::path(".") : fs::path(o.out); }

// ---- subcommands -------------------------------------------------------------

int cmd_train(const Options& o) {
  const auto src = source_for(o.data, o);
  const std::string variant_name = o.variants.empty() ? "MBGD-UR-BN" : o.variants.front();
  const auto alg = parse_algorithm(variant_name);

  ExperimentSpec spec;
  spec.base = train_config(o);
  spec.lambda_cv = !lambda_fixed(o);
  TrainConfig cfg = config_for(alg, spec);
  if (!o.bn.empty()) cfg.bn_variant = parse_bn_variant(o.bn);
  cfg.seed = train_seed(o.seed, 0, 0);
  cfg.validate();

  Encoded enc = load_source(src);
  Dictionaries dicts = enc.dictionaries;
  Dataset all = make_dataset(std::move(enc));

  Dataset train_set, test_set;
  Preprocessor pre;
  if (o.holdout) {
    auto split = split_70_30(all, split_seed(o.seed, 0, 0));
    pre = standardize(split);
    train_set = std::move(split.train);
    test_set = std::move(split.test);
  } else {
    train_set = all;
    pre = Preprocessor::fit(train_set.X);
    train_set.X = pre.apply(train_set.X);
  }

  const auto outcome = fit(train_set, cfg);

  ModelFile file;
  file.model = outcome.fit.model;
  file.pipeline = PipelineInfo{src.label_column, src.categorical_columns, dicts, pre};
  file.metadata = {{"variant", variant_name},
                   {"lambda", outcome.lambda},
                   {"ur_target", cfg.loss.ur_target.describe()},
                   {"final_epochs", outcome.fit.final_epochs},
                   {"stop_epochs", outcome.fit.stop_epochs},
                   {"seed", o.seed}};

  const auto dir = out_dir(o);
  save_model(dir / "model.json", file);
  write_text(dir / "trace.csv", trace_to_csv(outcome.fit.trace));

  json summary = {{"model", (dir / "model.json").string()},
                  {"trace", (dir / "trace.csv").string()},
                  {"rules", cfg.rules},
                  {"bn_variant", to_string(cfg.bn_variant)},
                  {"lambda", outcome.lambda},
                  {"stop_epochs", outcome.fit.stop_epochs},
                  {"final_epochs", outcome.fit.final_epochs},
                  {"train", metrics_json(evaluate(outcome.fit.model, train_set))}};
  if (!outcome.cv_scores.empty()) summary["cv_mean_val_bca"] = outcome.cv_scores;
  if (o.holdout) summary["test"] = metrics_json(evaluate(outcome.fit.model, test_set));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// Rows of a CSV encoded with the dictionaries and scaling stored in the model.
Dataset dataset_for_model(const ModelFile& file, const Options& o) {
  if (!file.pipeline) {
    throw Error(ErrorKind::BadModelFile, "model file carries no preprocessing pipeline", {{"path", o.model}});
  }
  const auto& p = *file.pipeline;
  if (o.data.empty()) throw Error(ErrorKind::InvalidArgument, "--data is required", {{"flag", "--data"}});
  Encoded enc;
  if (o.data.rfind(kSyntheticPrefix, 0) == 0) {
    enc = load_source(make_source(o.data, "label", {}));
    if (enc.dictionaries.labels != p.dictionaries.labels ||
        enc.dictionaries.feature_names != p.dictionaries.feature_names) {
      throw Error(ErrorKind::DimensionMismatch, "synthetic data does not match the model's dictionaries");
    }
  } else {
    const std::string label = o.label_col.empty() ? p.label_column : o.label_col;
    enc = encode_with(load_csv(o.data, label, p.categorical_columns), p.dictionaries);
  }
  enc.X = p.preprocessor.apply(enc.X);
  return make_dataset(std::move(enc));
}

int cmd_evaluate(const Options& o) {
  const auto file = load_model(o.model);
  const auto data = dataset_for_model(file, o);
  json j = metrics_json(evaluate(file.model, data));
  j["samples"] = data.size();
  if (!o.out.empty()) write_text(o.out, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_inspect(const Options& o) {
  const auto file = load_model(o.model);
  const auto data = dataset_for_model(file, o);
  const auto diag = firing_diagnostics(file.model, data.X);
  const double max_entropy = std::log(double(file.model.num_rules()));
  const auto hist = histogram(diag.entropy, o.bins, 0.0, max_entropy > 0.0 ? max_entropy : 1.0);
  const Matrix firing = firing_levels(data.X, file.model);

  json j = {{"rules", file.model.num_rules()},
            {"samples", data.size()},
            {"mean_firing", std::vector<double>(diag.mean_firing.data(), diag.mean_firing.data() + diag.mean_firing.size())},
            {"firing_variance", diag.firing_variance()},
            {"mean_entropy", diag.mean_entropy()},
            {"max_entropy", max_entropy},
            {"entropy_histogram", {{"edges", hist.edges}, {"counts", hist.counts}}}};

  const auto dir = out_dir(o);
  std::string csv = "sample,label,entropy,dominant_rule,dominant_firing\n";
  for (Eigen::Index n = 0; n < firing.rows(); ++n) {
    Eigen::Index r = 0;
    const double top = firing.row(n).maxCoeff(&r);
    csv += fmt::format("{},{},{},{},{}\n", n, data.y[std::size_t(n)], format_real(diag.entropy(n)), r, format_real(top));
  }
  write_text(dir / "firing.json", j.dump(2) + "\n");
  write_text(dir / "firing_samples.csv", csv);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_fold(const Options& o) {
  auto file = load_model(o.model);
  if (o.out.empty()) throw Error(ErrorKind::InvalidArgument, "--out is required", {{"flag", "--out"}});
  if (file.model.bn_variant == BNVariant::None) {
    std::cerr << "warning: model has no BN layer; writing an unchanged copy\n";
  } else {
    file.model = fold_model(file.model);
  }
  file.metadata["folded"] = true;
  save_model(o.out, file);
  std::cout << json{{"model", o.out}, {"bn_variant", to_string(file.model.bn_variant)}}.dump(2) << "\n";
  return 0;
}

int cmd_benchmark(const Options& o) {
  std::vector<std::string> paths = o.datasets;
  if (!o.data.empty()) paths.insert(paths.begin(), o.data);
  const auto spec = experiment_spec(o, paths);
  const auto report = run_benchmark(spec);
  const auto dir = out_dir(o);
  write_text(dir / "report.json", report_json(report).dump(1) + "\n");
  write_text(dir / "results.csv", results_csv(report));

  fmt::print("{:<14} {:<12} {:>5} {:>8} {:>8} {:>8} {:>8}\n", "variant", "dataset", "runs", "RCA", "sd", "BCA", "sd");
  for (const auto& a : report.aggregates) {
    fmt::print("{:<14} {:<12} {:>5} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f}\n", to_string(a.algorithm),
               report.dataset_names[a.dataset], a.runs, a.mean_rca, a.std_rca, a.mean_bca, a.std_bca);
  }
  std::size_t failed = 0;
  for (const auto& r : report.runs) failed += r.ok ? 0 : 1;
  if (failed) fmt::print(stderr, "{} of {} runs failed; see report.json\n", failed, report.runs.size());
  return 0;
}

int cmd_sweep(const Options& o) {
  Options one = o;
  if (one.variants.size() > 1) {
    throw Error(ErrorKind::InvalidArgument, "sweep-batch takes a single variant", {{"flag", "--variant"}});
  }
  if (one.variants.empty()) one.variants = {"MBGD-UR-BN"};
  const auto spec = experiment_spec(one, {o.data});
  const auto rows = sweep_batch(spec, o.sizes);
  const auto csv = sweep_csv(rows);
  for (const auto& r : rows)
    if (r.skipped) fmt::print(stderr, "warning: batch size {} skipped ({})\n", r.batch_size, r.note);
  write_text(o.out.empty() ? fs::path("sweep.csv") : fs::path(o.out), csv);
  std::cout << csv;
  return 0;
}

int cmd_synth(const Options& o) {
  std::vector<std::string> names;
  if (o.name.empty() || o.name == "all") {
    names = synthetic_names();
  } else {
    names = {o.name};
  }
  const auto dir = out_dir(o);
  for (const auto& n : names) {
    write_text(dir / (n + ".csv"), to_csv(generate_mixture(synthetic_spec(n), o.seed)));
    std::cout << (dir / (n + ".csv")).string() << "\n";
  }
  return 0;
}

void print_error(const std::string& code, const std::string& message, const Error::Context& ctx) {
  json c = json::object();
  for (const auto& [k, v] : ctx) c[k] = v;
  std::cerr << json{{"code", code}, {"message", message}, {"context", c}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TSK fuzzy classifiers trained by mini-batch gradient descent"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "Fit one model and write model.json and trace.csv");
  add_data_flags(train, o);
  add_train_flags(train, o);
  train->add_option("--variant", o.variants, "Algorithm variant (default MBGD-UR-BN)")->expected(1);
  train->add_option("--bn", o.bn, "Override the BN placement: none, consequent, global, rule");
  train->add_flag("--holdout", o.holdout, "Hold out a random 30% for testing");
  train->add_option("--out", o.out, "Output directory");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Metrics of a saved model on a CSV");
  evaluate_cmd->add_option("--model", o.model, "Model file")->required();
  add_data_flags(evaluate_cmd, o);
  evaluate_cmd->add_option("--out", o.out, "Write metrics JSON here");

  auto* bench = app.add_subcommand("benchmark", "Repeated 70/30 splits over variants and datasets");
  bench->add_option("--data", o.datasets, "CSV files or synthetic:<preset>, comma separated")->delimiter(',');
  bench->add_option("--label-col", o.label_col, "Name of the label column");
  bench->add_option("--categorical-cols", o.categorical_cols, "Comma separated categorical columns")->delimiter(',');
  add_train_flags(bench, o);
  bench->add_option("--variant", o.variants, "Variants, comma separated (default all)")->delimiter(',');
  bench->add_option("--splits", o.splits, "Number of random splits")->capture_default_str();
  bench->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
  bench->add_option("--out", o.out, "Output directory");

  auto* sweep = app.add_subcommand("sweep-batch", "Test accuracy as a function of batch size");
  add_data_flags(sweep, o);
  add_train_flags(sweep, o);
  sweep->add_option("--variant", o.variants, "Algorithm variant (default MBGD-UR-BN)")->expected(1);
  sweep->add_option("--sizes", o.sizes, "Batch sizes, comma separated")->delimiter(',')->capture_default_str();
  sweep->add_option("--splits", o.splits, "Number of random splits")->capture_default_str();
  sweep->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
  sweep->add_option("--out", o.out, "Output CSV (default sweep.csv)");

  auto* fold = app.add_subcommand("fold", "Merge BN into the consequents of a saved model");
  fold->add_option("--model", o.model, "Model file")->required();
  fold->add_option("--out", o.out, "Folded model file");

  auto* inspect = app.add_subcommand("inspect", "Export firing-level diagnostics");
  inspect->add_option("--model", o.model, "Model file")->required();
  add_data_flags(inspect, o);
  inspect->add_option("--bins", o.bins, "Entropy histogram bins")->capture_default_str();
  inspect->add_option("--out", o.out, "Output directory");

  auto* synth = app.add_subcommand("synth", "Write the bundled synthetic datasets as CSV");
  synth->add_option("--name", o.name, "Preset name or 'all'");
  synth->add_option("--seed", o.seed, "Generator seed")->default_val(2020);
  synth->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("Usage", e.what(), {});
    return 2;
  }

  try {
    if (*train) return cmd_train(o);
    if (*evaluate_cmd) return cmd_evaluate(o);
    if (*bench) return cmd_benchmark(o);
    if (*sweep) return cmd_sweep(o);
    if (*fold) return cmd_fold(o);
    if (*inspect) return cmd_inspect(o);
    if (*synth) return cmd_synth(o);
  } catch (const Error& e) {
    print_error(std::string(to_string(e.kind())), e.what(), e.context());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    print_error("Internal", e.what(), {});
    return 3;
  }
  return 2;
}
