#include "tsk/data.hpp"
#include "tsk/error.hpp"

#include <gtest/gtest.h>

#include <random>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace tsk;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no tsk::Error thrown";
  return ErrorKind::InvalidArgument;
}

Dataset numbered(int n, int classes = 2) {
  Dataset ds;
  ds.X.resize(n, 1);
  ds.num_classes = classes;
  for (int i = 0; i < n; ++i) {
    ds.X(i, 0) = i;
    ds.y.push_back(i % classes);
  }
  return ds;
}

}  // namespace

TEST(Csv, ThreeRowsTwoNumericColumns) {
  auto t = parse_csv("a,b,y\n1,2,p\n3,4,q\n5,6,p\n", "y");
  EXPECT_EQ(t.num_rows(), 3u);
  EXPECT_EQ(t.column_kinds[0], ColumnKind::Numeric);
  EXPECT_EQ(t.column_kinds[1], ColumnKind::Numeric);
  EXPECT_EQ(t.label_index(), 2u);
}

TEST(Csv, RaggedRowReportsLine) {
  try {
    parse_csv("a,b,y\n1,2,p\n3,q\n", "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RaggedRow);
    EXPECT_EQ(e.context().at("line"), "3");
  }
}

TEST(Csv, UnparseableNumericReportsLineAndColumn) {
  try {
    parse_csv("a,b,y\n1,2,p\n3,x4,q\n", "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnparseableNumeric);
    EXPECT_EQ(e.context().at("line"), "3");
    EXPECT_EQ(e.context().at("column"), "b");
  }
}

TEST(Csv, MissingLabelAndUnknownCategorical) {
  EXPECT_EQ(kind_of([] { parse_csv("a,b\n1,2\n", "y"); }), ErrorKind::MissingLabelColumn);
  EXPECT_EQ(kind_of([] { parse_csv("a,y\n1,p\n", "y", {"zz"}); }), ErrorKind::UnknownColumn);
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/file.csv", "y"); }), ErrorKind::Io);
}

TEST(Csv, QuotedFieldsKeepCommas) {
  auto t = parse_csv("a,y\n1,\"x,y\"\n2,z\n", "y");
  EXPECT_EQ(t.rows[0][1], "x,y");
}

TEST(Encode, OneHotCategorical) {
  auto enc = encode(parse_csv("c,y\nA,u\nB,v\nA,u\n", "y", {"c"}));
  Matrix expect(3, 2);
  expect << 1, 0, 0, 1, 1, 0;
  EXPECT_EQ(enc.X, expect);
  EXPECT_EQ(enc.dictionaries.feature_names, (std::vector<std::string>{"c=A", "c=B"}));
}

TEST(Encode, LabelsInSortedOrder) {
  auto enc = encode(parse_csv("x,y\n1,cat\n2,dog\n3,cat\n", "y"));
  EXPECT_EQ(enc.y, (Labels{0, 1, 0}));
  EXPECT_EQ(make_dataset(enc).num_classes, 2);
}

TEST(Encode, AbaloneShapedTableHasTenFeatures) {
  // sex is categorical with three values, seven numeric measurements.
  std::string csv = "sex,length,diameter,height,whole,shucked,viscera,shell,rings\n";
  const char* sexes[] = {"M", "F", "I"};
  for (int i = 0; i < 12; ++i) {
    csv += std::string(sexes[i % 3]) + ",0.4,0.3,0.1,0.5,0.2,0.1,0.15," + std::to_string(i % 3) + "\n";
  }
  auto t = parse_csv(csv, "rings", {"sex"});
  EXPECT_EQ(t.num_columns() - 1, 8u);
  auto ds = make_dataset(encode(t));
  EXPECT_EQ(ds.dim(), 10);
  EXPECT_EQ(ds.num_classes, 3);
}

TEST(Encode, OneHotBlocksSumToOne) {
  auto enc = encode(parse_csv("c,x,y\nA,1,u\nB,2,v\nC,3,u\nB,4,v\n", "y", {"c"}));
  for (Eigen::Index i = 0; i < enc.X.rows(); ++i) EXPECT_DOUBLE_EQ(enc.X.row(i).head(3).sum(), 1.0);
}

TEST(Encode, Errors) {
  EXPECT_EQ(kind_of([] { encode(parse_csv("x,y\n", "y")); }), ErrorKind::EmptyTable);
  EXPECT_EQ(kind_of([] { encode(parse_csv("x,y\n1,a\n2,a\n", "y")); }), ErrorKind::SingleClassLabel);
}

TEST(Encode, WithDictionariesHandlesUnseenValues) {
  auto train = encode(parse_csv("c,y\nA,u\nB,v\n", "y", {"c"}));
  auto test = encode_with(parse_csv("c,y\nZ,u\nB,v\n", "y", {"c"}), train.dictionaries);
  EXPECT_EQ(test.X.row(0).sum(), 0.0);
  EXPECT_EQ(test.X(1, 1), 1.0);
  EXPECT_EQ(kind_of([&] { encode_with(parse_csv("c,y\nA,w\n", "y", {"c"}), train.dictionaries); }),
            ErrorKind::UnknownLabel);
}

TEST(Preprocess, HandComputedColumn) {
  Matrix X(2, 1);
  X << 1, 3;
  auto [pre, Z] = fit_transform(X);
  EXPECT_DOUBLE_EQ(pre.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(pre.std(0), 1.0);
  EXPECT_DOUBLE_EQ(Z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(Z(1, 0), 1.0);
}

TEST(Preprocess, ConstantColumnBecomesZero) {
  Matrix X(3, 1);
  X << 5, 5, 5;
  auto [pre, Z] = fit_transform(X);
  EXPECT_EQ(pre.std(0), 1.0);
  EXPECT_EQ(Z, Matrix::Zero(3, 1));
}

TEST(Preprocess, RoundTripAndIdempotence) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(4.0, 7.0);
  Matrix X(50, 4);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  auto [pre, Z] = fit_transform(X);
  for (Eigen::Index d = 0; d < 4; ++d) {
    const double mean = Z.col(d).mean();
    const double sd = std::sqrt((Z.col(d).array() - mean).square().mean());
    EXPECT_LE(std::abs(mean), 1e-9);
    EXPECT_LE(std::abs(sd - 1.0), 1e-9);
  }
  auto [pre2, Z2] = fit_transform(Z);
  EXPECT_LE((Z2 - Z).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(kind_of([&] { pre.apply(Matrix::Zero(2, 3)); }), ErrorKind::DimensionMismatch);
}

TEST(Split, SizesFollowFloorRule) {
  auto s = split_70_30(numbered(846), 1);
  EXPECT_EQ(s.train.size(), 592);
  EXPECT_EQ(s.test.size(), 254);
  auto small = split_70_30(numbered(10), 1);
  EXPECT_EQ(small.train.size(), 7);
  EXPECT_EQ(small.test.size(), 3);
  EXPECT_EQ(kind_of([] { split_70_30(numbered(9), 1); }), ErrorKind::TooFewSamples);
}

TEST(Split, DisjointCoverAndDeterministic) {
  const auto ds = numbered(100);
  auto a = split_70_30(ds, 42);
  auto b = split_70_30(ds, 42);
  EXPECT_EQ(a.train_indices, b.train_indices);
  EXPECT_EQ(a.test_indices, b.test_indices);
  std::vector<Eigen::Index> all = a.train_indices;
  all.insert(all.end(), a.test_indices.begin(), a.test_indices.end());
  std::sort(all.begin(), all.end());
  std::vector<Eigen::Index> expect(100);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  for (std::size_t i = 0; i < a.test_indices.size(); ++i)
    EXPECT_EQ(a.test.X(Eigen::Index(i), 0), double(a.test_indices[i]));
}

TEST(Split, TestFrequencyOverThirtySeeds) {
  const auto ds = numbered(200);
  std::vector<int> count(200, 0);
  for (int seed = 0; seed < 30; ++seed)
    for (auto i : split_70_30(ds, std::uint64_t(seed)).test_indices) ++count[std::size_t(i)];
  // every split holds exactly 60 of 200; per-index counts are ~Binomial(30, 0.3)
  EXPECT_EQ(std::accumulate(count.begin(), count.end(), 0), 30 * 60);
  for (int c : count) {
    EXPECT_GE(c, 1);
    EXPECT_LE(c, 20);
  }
}

TEST(Split, StandardizeUsesTrainStatisticsOnly) {
  auto ds = numbered(20);
  auto s = split_70_30(ds, 5);
  const double train_mean = s.train.X.col(0).mean();
  auto pre = standardize(s);
  EXPECT_DOUBLE_EQ(pre.mean(0), train_mean);
  EXPECT_LE(std::abs(s.train.X.col(0).mean()), 1e-12);
}
