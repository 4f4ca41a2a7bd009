#include "test_support.hpp"

#include "tsk/error.hpp"
#include "tsk/serialize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

using namespace tsk;
using namespace tsk::testing;
using nlohmann::json;

namespace {

std::filesystem::path tmp(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "tsk_serialize_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ErrorKind load_kind(const json& j) {
  try {
    model_from_json(j);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(ModelJson, RoundTripIsExactForEveryVariant) {
  Rng rng(31);
  for (auto v : {BNVariant::None, BNVariant::Consequent, BNVariant::Global, BNVariant::RuleSpecific}) {
    auto m = random_model(3, 4, 2, v, rng);
    const auto back = model_from_json(json::parse(model_to_json(m).dump()));
    EXPECT_EQ(back.bn_variant, v);
    EXPECT_EQ(back.antecedents.centers, m.antecedents.centers);
    EXPECT_EQ(back.antecedents.spreads, m.antecedents.spreads);
    EXPECT_EQ(back.consequents.bias, m.consequents.bias);
    EXPECT_EQ(back.consequents.weights, m.consequents.weights);
    ASSERT_EQ(back.bn.size(), m.bn.size());
    for (std::size_t b = 0; b < m.bn.size(); ++b) {
      EXPECT_EQ(back.bn[b].running_var, m.bn[b].running_var);
      EXPECT_EQ(back.bn[b].gamma, m.bn[b].gamma);
      EXPECT_EQ(back.bn[b].batches_seen, m.bn[b].batches_seen);
    }
  }
}

TEST(ModelJson, Layout) {
  Rng rng(1);
  auto m = random_model(2, 3, 4, BNVariant::RuleSpecific, rng);
  const auto j = model_to_json(m);
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["R"], 2);
  EXPECT_EQ(j["D"], 3);
  EXPECT_EQ(j["C"], 4);
  EXPECT_EQ(j["bn_variant"], "rule");
  EXPECT_EQ(j["b"].size(), 2u);
  EXPECT_EQ(j["b"][0].size(), 3u);
  EXPECT_EQ(j["b"][0][0].size(), 4u);
  EXPECT_EQ(j["b"][1][2][3].get<double>(), m.consequents.weight(1, 2, 3));
  EXPECT_EQ(j["b0"][1][3].get<double>(), m.consequents.bias(1, 3));
  EXPECT_EQ(j["m"][1][2].get<double>(), m.antecedents.centers(1, 2));
  EXPECT_TRUE(j["bn_state"].is_array());
  EXPECT_EQ(j["bn_state"][1]["epsilon"], 1e-8);
  EXPECT_TRUE(model_to_json(random_model(2, 3, 4, BNVariant::None, rng))["bn_state"].is_null());
}

TEST(ModelJson, MalformedDocuments) {
  Rng rng(2);
  const auto good = model_to_json(random_model(2, 2, 2, BNVariant::Consequent, rng));
  auto j = good;
  j["version"] = 2;
  EXPECT_EQ(load_kind(j), ErrorKind::BadModelFile);
  j = good;
  j.erase("sigma");
  EXPECT_EQ(load_kind(j), ErrorKind::BadModelFile);
  j = good;
  j["m"][0].push_back(1.0);
  EXPECT_EQ(load_kind(j), ErrorKind::BadModelFile);
  j = good;
  j["bn_state"] = nullptr;
  EXPECT_EQ(load_kind(j), ErrorKind::BadModelFile);
  j = good;
  j["bn_variant"] = "weird";
  EXPECT_EQ(load_kind(j), ErrorKind::BadModelFile);
  j = good;
  j["bn_state"]["running_var"][0] = -1.0;
  EXPECT_EQ(load_kind(j), ErrorKind::BadModelFile);
  EXPECT_EQ(load_kind(json::array()), ErrorKind::BadModelFile);
}

TEST(ModelFileIo, PipelineRoundTripAndErrors) {
  Rng rng(3);
  ModelFile f;
  f.model = random_model(2, 3, 2, BNVariant::Consequent, rng);
  PipelineInfo p;
  p.label_column = "y";
  p.categorical_columns = {"c"};
  p.dictionaries.labels = {"a", "b"};
  p.dictionaries.categorical = {{"c", {"u", "v"}}};
  p.dictionaries.feature_names = {"c=u", "c=v", "x"};
  p.preprocessor.mean = Vector::Constant(3, 0.125);
  p.preprocessor.std = Vector::Constant(3, 2.0);
  f.pipeline = p;
  f.metadata = {{"seed", 7}};
  save_model(tmp("m.json"), f);
  const auto back = load_model(tmp("m.json"));
  ASSERT_TRUE(back.pipeline.has_value());
  EXPECT_EQ(back.pipeline->dictionaries.categorical[0].values, (std::vector<std::string>{"u", "v"}));
  EXPECT_EQ(back.pipeline->preprocessor.std, p.preprocessor.std);
  EXPECT_EQ(back.metadata["seed"], 7);

  std::ofstream(tmp("broken.json")) << "{ not json";
  try {
    load_model(tmp("broken.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadModelFile);
  }
  try {
    load_model(tmp("missing.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(TraceCsv, Format) {
  TrainTrace t;
  t.epochs.push_back({1, 0.5, std::nan(""), 1.25, 3.0});
  t.epochs.push_back({2, 0.1, 0.75, 0.3, 2.0});
  EXPECT_EQ(trace_to_csv(t),
            "epoch,loss,val_bca,g_l1_antecedent,g_l1_consequent\n"
            "1,0.5,,1.25,3\n"
            "2,0.1,0.75,0.3,2\n");
}

TEST(FormatReal, RoundTrips) {
  Rng rng(4);
  std::normal_distribution<double> n(0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = n(rng);
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
}
