#include "tsk/data.hpp"

#include "tsk/error.hpp"
#include "tsk/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace tsk {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      cell.push_back(ch);
    } else if (ch == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

RawTable parse_stream(std::istream& in, const std::string& label_column,
                      const std::vector<std::string>& categorical_columns) {
  std::string line;
  std::size_t line_no = 0;
  RawTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank(line)) break;
  }
  if (line_no == 0 || is_blank(line)) throw Error(ErrorKind::EmptyTable, "CSV has no header line");

  table.column_names = split_line(line);
  table.column_kinds.assign(table.column_names.size(), ColumnKind::Numeric);

  auto find_column = [&](const std::string& name) {
    auto it = std::find(table.column_names.begin(), table.column_names.end(), name);
    return it == table.column_names.end() ? std::size_t(-1)
                                          : std::size_t(it - table.column_names.begin());
  };

  const auto label_pos = find_column(label_column);
  if (label_pos == std::size_t(-1)) {
    throw Error(ErrorKind::MissingLabelColumn, "label column '" + label_column + "' not found in header",
                {{"column", label_column}, {"flag", "--label-col"}});
  }
  if (std::count(table.column_names.begin(), table.column_names.end(), label_column) > 1) {
    throw Error(ErrorKind::MissingLabelColumn, "label column '" + label_column + "' appears more than once",
                {{"column", label_column}, {"flag", "--label-col"}});
  }
  table.column_kinds[label_pos] = ColumnKind::Label;
  for (const auto& name : categorical_columns) {
    const auto pos = find_column(name);
    if (pos == std::size_t(-1)) {
      throw Error(ErrorKind::UnknownColumn, "categorical column '" + name + "' not found in header",
                  {{"column", name}});
    }
    if (pos != label_pos) table.column_kinds[pos] = ColumnKind::Categorical;
  }

  const auto arity = table.column_names.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto cells = split_line(line);
    if (cells.size() != arity) {
      throw Error(ErrorKind::RaggedRow,
                  "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(arity),
                  {{"line", std::to_string(line_no)}});
    }
    for (std::size_t j = 0; j < arity; ++j) {
      double v;
      if (table.column_kinds[j] == ColumnKind::Numeric && !parse_double(cells[j], v)) {
        throw Error(ErrorKind::UnparseableNumeric,
                    "line " + std::to_string(line_no) + ", column '" + table.column_names[j] +
                        "': cannot parse '" + cells[j] + "' as a number",
                    {{"line", std::to_string(line_no)}, {"column", table.column_names[j]}});
      }
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace

std::size_t RawTable::label_index() const {
  for (std::size_t j = 0; j < column_kinds.size(); ++j)
    if (column_kinds[j] == ColumnKind::Label) return j;
  throw Error(ErrorKind::MissingLabelColumn, "table has no label column");
}

RawTable load_csv(const std::filesystem::path& path, const std::string& label_column,
                  const std::vector<std::string>& categorical_columns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'", {{"path", path.string()}});
  return parse_stream(in, label_column, categorical_columns);
}

RawTable parse_csv(const std::string& text, const std::string& label_column,
                   const std::vector<std::string>& categorical_columns) {
  std::istringstream in(text);
  return parse_stream(in, label_column, categorical_columns);
}

Encoded encode(const RawTable& table) {
  if (table.rows.empty()) throw Error(ErrorKind::EmptyTable, "table has no data rows");

  Dictionaries dict;
  const auto label_col = table.label_index();
  std::set<std::string> labels;
  for (const auto& row : table.rows) labels.insert(row[label_col]);
  if (labels.size() < 2) {
    throw Error(ErrorKind::SingleClassLabel, "label column has a single distinct value",
                {{"value", *labels.begin()}});
  }
  dict.labels.assign(labels.begin(), labels.end());

  for (std::size_t j = 0; j < table.num_columns(); ++j) {
    if (table.column_kinds[j] != ColumnKind::Categorical) continue;
    std::set<std::string> values;
    for (const auto& row : table.rows) values.insert(row[j]);
    dict.categorical.push_back({table.column_names[j], {values.begin(), values.end()}});
  }
  for (std::size_t j = 0, k = 0; j < table.num_columns(); ++j) {
    switch (table.column_kinds[j]) {
      case ColumnKind::Numeric:
        dict.feature_names.push_back(table.column_names[j]);
        break;
      case ColumnKind::Categorical:
        for (const auto& v : dict.categorical[k].values)
          dict.feature_names.push_back(table.column_names[j] + "=" + v);
        ++k;
        break;
      case ColumnKind::Label:
        break;
    }
  }
  return encode_with(table, dict);
}

Encoded encode_with(const RawTable& table, const Dictionaries& dict) {
  if (table.rows.empty()) throw Error(ErrorKind::EmptyTable, "table has no data rows");
  table.label_index();

  std::unordered_map<std::string, int> label_index;
  for (std::size_t i = 0; i < dict.labels.size(); ++i) label_index[dict.labels[i]] = int(i);

  // Map each table column to (kind, dictionary) and count output columns.
  struct Plan {
    ColumnKind kind;
    const Dictionaries::Categorical* cat = nullptr;
  };
  std::vector<Plan> plan;
  Eigen::Index width = 0;
  for (std::size_t j = 0; j < table.num_columns(); ++j) {
    Plan p{table.column_kinds[j]};
    if (p.kind == ColumnKind::Categorical) {
      auto it = std::find_if(dict.categorical.begin(), dict.categorical.end(),
                             [&](const auto& c) { return c.column == table.column_names[j]; });
      if (it == dict.categorical.end()) {
        throw Error(ErrorKind::UnknownColumn,
                    "column '" + table.column_names[j] + "' has no categorical dictionary",
                    {{"column", table.column_names[j]}});
      }
      p.cat = &*it;
      width += Eigen::Index(it->values.size());
    } else if (p.kind == ColumnKind::Numeric) {
      width += 1;
    }
    plan.push_back(p);
  }
  if (!dict.feature_names.empty() && Eigen::Index(dict.feature_names.size()) != width) {
    throw Error(ErrorKind::DimensionMismatch, "table columns do not match the encoding dictionaries");
  }

  Encoded out;
  out.dictionaries = dict;
  out.X = Matrix::Zero(Eigen::Index(table.num_rows()), width);
  out.y.resize(table.num_rows());
  for (std::size_t i = 0; i < table.num_rows(); ++i) {
    const auto& row = table.rows[i];
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < plan.size(); ++j) {
      switch (plan[j].kind) {
        case ColumnKind::Numeric: {
          double v = 0.0;
          if (!parse_double(row[j], v)) {
            throw Error(ErrorKind::UnparseableNumeric, "cannot parse '" + row[j] + "' as a number",
                        {{"row", std::to_string(i)}, {"column", table.column_names[j]}});
          }
          out.X(Eigen::Index(i), col++) = v;
          break;
        }
        case ColumnKind::Categorical: {
          const auto& values = plan[j].cat->values;
          auto it = std::lower_bound(values.begin(), values.end(), row[j]);
          if (it != values.end() && *it == row[j]) out.X(Eigen::Index(i), col + (it - values.begin())) = 1.0;
          col += Eigen::Index(values.size());
          break;
        }
        case ColumnKind::Label: {
          auto it = label_index.find(row[j]);
          if (it == label_index.end()) {
            throw Error(ErrorKind::UnknownLabel, "label '" + row[j] + "' not seen during training",
                        {{"label", row[j]}});
          }
          out.y[i] = it->second;
          break;
        }
      }
    }
  }
  return out;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.feature_names = feature_names;
  out.X.resize(Eigen::Index(indices.size()), X.cols());
  out.y.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.X.row(Eigen::Index(i)) = X.row(indices[i]);
    out.y[i] = y[std::size_t(indices[i])];
  }
  return out;
}

void Dataset::validate() const {
  if (Eigen::Index(y.size()) != X.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "feature rows and label count differ");
  }
  if (num_classes < 2) throw Error(ErrorKind::SingleClassLabel, "dataset needs at least two classes");
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw Error(ErrorKind::UnknownLabel, "label " + std::to_string(label) + " out of range");
    }
  }
  if (!X.allFinite()) throw Error(ErrorKind::NumericFailure, "dataset contains NaN or Inf");
}

Dataset make_dataset(Encoded encoded) {
  Dataset ds;
  ds.X = std::move(encoded.X);
  ds.y = std::move(encoded.y);
  ds.num_classes = int(encoded.dictionaries.labels.size());
  ds.feature_names = std::move(encoded.dictionaries.feature_names);
  ds.validate();
  return ds;
}

Preprocessor Preprocessor::fit(const Matrix& train) {
  if (train.rows() < 2) {
    throw Error(ErrorKind::TooFewSamples, "z-normalization needs at least two training rows");
  }
  Preprocessor p;
  const double n = double(train.rows());
  p.mean = train.colwise().mean().transpose();
  p.std.resize(train.cols());
  for (Eigen::Index d = 0; d < train.cols(); ++d) {
    const double var = (train.col(d).array() - p.mean(d)).square().sum() / n;
    const double s = std::sqrt(var);
    p.std(d) = s > 0.0 ? s : 1.0;
  }
  return p;
}

Matrix Preprocessor::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "preprocessor was fitted on " + std::to_string(mean.size()) +
                                                  " features, got " + std::to_string(X.cols()));
  }
  return ((X.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array()).matrix();
}

std::pair<Preprocessor, Matrix> fit_transform(const Matrix& train) {
  auto p = Preprocessor::fit(train);
  Matrix z = p.apply(train);
  return {std::move(p), std::move(z)};
}

Split split_70_30(const Dataset& ds, std::uint64_t seed) {
  const auto n = ds.size();
  if (n < 10) {
    throw Error(ErrorKind::TooFewSamples, "a 70/30 split needs at least 10 samples",
                {{"n", std::to_string(n)}});
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  auto rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = std::size_t((7 * n) / 10);
  Split s;
  s.train_indices.assign(order.begin(), order.begin() + std::ptrdiff_t(n_train));
  s.test_indices.assign(order.begin() + std::ptrdiff_t(n_train), order.end());
  std::sort(s.train_indices.begin(), s.train_indices.end());
  std::sort(s.test_indices.begin(), s.test_indices.end());
  s.train = ds.subset(s.train_indices);
  s.test = ds.subset(s.test_indices);
  return s;
}

Preprocessor standardize(Split& split) {
  auto p = Preprocessor::fit(split.train.X);
  split.train.X = p.apply(split.train.X);
  split.test.X = p.apply(split.test.X);
  return p;
}

}  // namespace tsk
