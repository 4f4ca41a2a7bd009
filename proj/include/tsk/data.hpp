#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tsk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

enum class ColumnKind { Numeric, Categorical, Label };

// CSV contents before encoding. Numeric cells have been validated at load
// time; all cells are kept as text.
struct RawTable {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<std::vector<std::string>> rows;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_columns() const { return column_names.size(); }
  std::size_t label_index() const;
};

RawTable load_csv(const std::filesystem::path& path, const std::string& label_column,
                  const std::vector<std::string>& categorical_columns = {});

// Same as load_csv but reads from an in-memory string (used by tests and
// the bundled generators).
RawTable parse_csv(const std::string& text, const std::string& label_column,
                   const std::vector<std::string>& categorical_columns = {});

// Value dictionaries learned while encoding. Categorical values and labels
// are stored in lexicographic order; the position is the encoded index.
struct Dictionaries {
  struct Categorical {
    std::string column;
    std::vector<std::string> values;
  };
  std::vector<Categorical> categorical;
  std::vector<std::string> labels;
  std::vector<std::string> feature_names;
};

struct Encoded {
  Matrix X;
  Labels y;
  Dictionaries dictionaries;
};

// One-hot encodes categorical columns and maps labels to 0..C-1.
Encoded encode(const RawTable& table);

// Encodes with existing dictionaries. Unseen categorical values become an
// all-zero block; an unseen label is an error.
Encoded encode_with(const RawTable& table, const Dictionaries& dictionaries);

struct Dataset {
  Matrix X;
  Labels y;
  int num_classes = 0;
  std::vector<std::string> feature_names;

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }

  Dataset subset(const std::vector<Eigen::Index>& indices) const;
  // Throws unless shapes agree, labels lie in [0, C) and entries are finite.
  void validate() const;
};

Dataset make_dataset(Encoded encoded);

// Per-feature z-score statistics fitted on training data only.
struct Preprocessor {
  Vector mean;
  Vector std;  // population std; constant features store 1

  static Preprocessor fit(const Matrix& train);
  Matrix apply(const Matrix& X) const;
};

std::pair<Preprocessor, Matrix> fit_transform(const Matrix& train);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Eigen::Index> train_indices;
  std::vector<Eigen::Index> test_indices;
};

// Unstratified random split with |train| = floor(0.7 N).
Split split_70_30(const Dataset& ds, std::uint64_t seed);

// Fits a preprocessor on split.train and applies it to both halves.
Preprocessor standardize(Split& split);

}  // namespace tsk
