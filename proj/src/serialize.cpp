#include "tsk/serialize.hpp"

#include "tsk/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace tsk {

using nlohmann::json;

namespace {

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorKind::BadModelFile, "malformed model file: " + what);
}

Matrix read_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!j.is_array() || Eigen::Index(j.size()) != rows) bad(std::string(name) + " has the wrong number of rows");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[std::size_t(i)];
    if (!row.is_array() || Eigen::Index(row.size()) != cols) bad(std::string(name) + " has a row of the wrong length");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[std::size_t(k)].get<double>();
  }
  return m;
}

Vector read_vector(const json& j, Eigen::Index n, const char* name) {
  if (!j.is_array() || Eigen::Index(j.size()) != n) bad(std::string(name) + " has the wrong length");
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[std::size_t(i)].get<double>();
  return v;
}

json block_json(const BNBlock& b) {
  return {{"gamma", vector_json(b.gamma)},
          {"beta", vector_json(b.beta)},
          {"running_mean", vector_json(b.running_mean)},
          {"running_var", vector_json(b.running_var)},
          {"epsilon", b.epsilon},
          {"momentum", b.momentum},
          {"batches_seen", b.batches_seen}};
}

BNBlock read_block(const json& j, Eigen::Index D) {
  if (!j.is_object()) bad("bn_state block is not an object");
  BNBlock b;
  b.gamma = read_vector(j.at("gamma"), D, "gamma");
  b.beta = read_vector(j.at("beta"), D, "beta");
  b.running_mean = read_vector(j.at("running_mean"), D, "running_mean");
  b.running_var = read_vector(j.at("running_var"), D, "running_var");
  b.epsilon = j.at("epsilon").get<double>();
  b.momentum = j.at("momentum").get<double>();
  b.batches_seen = j.value("batches_seen", std::int64_t(1));
  if (!(b.epsilon > 0.0)) bad("epsilon must be positive");
  if ((b.running_var.array() < 0.0).any()) bad("running_var must be non-negative");
  return b;
}

}  // namespace

json model_to_json(const TSKModel& model) {
  model.validate();
  const auto R = model.num_rules();
  const auto D = model.dim();
  const auto C = model.num_classes();
  json b = json::array();
  for (Eigen::Index r = 0; r < R; ++r) b.push_back(matrix_rows(model.consequents.rule_weights(r)));

  json bn_state = nullptr;
  if (model.bn_variant == BNVariant::RuleSpecific) {
    bn_state = json::array();
    for (const auto& blk : model.bn) bn_state.push_back(block_json(blk));
  } else if (!model.bn.empty()) {
    bn_state = block_json(model.bn.front());
  }
  return {{"format", "tsk-fuzzy-model"},
          {"version", kModelFormatVersion},
          {"R", R},
          {"D", D},
          {"C", C},
          {"bn_variant", to_string(model.bn_variant)},
          {"m", matrix_rows(model.antecedents.centers)},
          {"sigma", matrix_rows(model.antecedents.spreads)},
          {"b0", matrix_rows(model.consequents.bias)},
          {"b", std::move(b)},
          {"bn_state", std::move(bn_state)}};
}

TSKModel model_from_json(const json& j) {
  try {
    if (!j.is_object()) bad("top level is not an object");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) bad("unsupported version " + std::to_string(version));
    const auto R = j.at("R").get<Eigen::Index>();
    const auto D = j.at("D").get<Eigen::Index>();
    const auto C = j.at("C").get<Eigen::Index>();
    if (R < 1 || D < 1 || C < 2) bad("R, D and C must be positive (C >= 2)");
    const auto variant = parse_bn_variant(j.at("bn_variant").get<std::string>());

    TSKModel model = TSKModel::zeros(R, D, C, variant);
    model.antecedents.centers = read_matrix(j.at("m"), R, D, "m");
    model.antecedents.spreads = read_matrix(j.at("sigma"), R, D, "sigma");
    model.consequents.bias = read_matrix(j.at("b0"), R, C, "b0");
    const auto& b = j.at("b");
    if (!b.is_array() || Eigen::Index(b.size()) != R) bad("b must hold one D x C block per rule");
    for (Eigen::Index r = 0; r < R; ++r) model.consequents.rule_weights(r) = read_matrix(b[std::size_t(r)], D, C, "b");

    const auto& st = j.at("bn_state");
    if (variant == BNVariant::None) {
      if (!st.is_null()) bad("bn_state present for a model without BN");
    } else if (variant == BNVariant::RuleSpecific) {
      if (!st.is_array() || Eigen::Index(st.size()) != R) bad("rule-specific bn_state needs one block per rule");
      for (Eigen::Index r = 0; r < R; ++r) model.bn[std::size_t(r)] = read_block(st[std::size_t(r)], D);
    } else {
      model.bn.front() = read_block(st, D);
    }
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadModelFile, std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::BadModelFile, e.what());
    throw;
  }
}

json to_json(const ModelFile& file) {
  json j = model_to_json(file.model);
  if (file.pipeline) {
    const auto& p = *file.pipeline;
    json cats = json::array();
    for (const auto& c : p.dictionaries.categorical) cats.push_back({{"column", c.column}, {"values", c.values}});
    j["pipeline"] = {{"label_column", p.label_column},
                     {"categorical_columns", p.categorical_columns},
                     {"labels", p.dictionaries.labels},
                     {"feature_names", p.dictionaries.feature_names},
                     {"categorical", std::move(cats)},
                     {"mean", vector_json(p.preprocessor.mean)},
                     {"std", vector_json(p.preprocessor.std)}};
  }
  j["metadata"] = file.metadata;
  return j;
}

ModelFile model_file_from_json(const json& j) {
  ModelFile f;
  f.model = model_from_json(j);
  try {
    if (j.contains("pipeline") && !j["pipeline"].is_null()) {
      const auto& p = j["pipeline"];
      PipelineInfo info;
      info.label_column = p.at("label_column").get<std::string>();
      info.categorical_columns = p.at("categorical_columns").get<std::vector<std::string>>();
      info.dictionaries.labels = p.at("labels").get<std::vector<std::string>>();
      info.dictionaries.feature_names = p.at("feature_names").get<std::vector<std::string>>();
      for (const auto& c : p.at("categorical")) {
        info.dictionaries.categorical.push_back(
            {c.at("column").get<std::string>(), c.at("values").get<std::vector<std::string>>()});
      }
      const auto D = f.model.dim();
      info.preprocessor.mean = read_vector(p.at("mean"), D, "pipeline.mean");
      info.preprocessor.std = read_vector(p.at("std"), D, "pipeline.std");
      if (Eigen::Index(info.dictionaries.labels.size()) != f.model.num_classes()) bad("label dictionary size != C");
      f.pipeline = std::move(info);
    }
    if (j.contains("metadata")) f.metadata = j["metadata"];
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadModelFile, std::string("malformed model file: ") + e.what());
  }
  return f;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  write_text(path, to_json(file).dump(1) + "\n");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open model file '" + path.string() + "'", {{"path", path.string()}});
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadModelFile, "model file is not valid JSON: " + std::string(e.what()),
                {{"path", path.string()}});
  }
  return model_file_from_json(j);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{}", v);
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::string out = "epoch,loss,val_bca,g_l1_antecedent,g_l1_consequent\n";
  for (const auto& e : trace.epochs) {
    out += fmt::format("{},{},{},{},{}\n", e.epoch, format_real(e.loss), format_real(e.val_bca),
                       format_real(e.g_l1_antecedent), format_real(e.g_l1_consequent));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'", {{"path", path.string()}});
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'", {{"path", path.string()}});
}

}  // namespace tsk
