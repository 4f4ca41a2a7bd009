#pragma once

#include "tsk/data.hpp"
#include "tsk/model.hpp"
#include "tsk/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace tsk {

inline constexpr int kModelFormatVersion = 1;

// What is needed to turn raw CSV rows into model inputs.
struct PipelineInfo {
  std::string label_column;
  std::vector<std::string> categorical_columns;
  Dictionaries dictionaries;
  Preprocessor preprocessor;
};

struct ModelFile {
  TSKModel model;
  std::optional<PipelineInfo> pipeline;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json model_to_json(const TSKModel& model);
TSKModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelFile& file);
ModelFile model_file_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

// Shortest text that reads back to the same double; NaN becomes "".
std::string format_real(double v);

// epoch,loss,val_bca,g_l1_antecedent,g_l1_consequent
std::string trace_to_csv(const TrainTrace& trace);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tsk
