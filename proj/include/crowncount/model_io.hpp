#pragma once

#include <filesystem>

#include "crowncount/classifiers.hpp"
#include "json.hpp"

namespace crowncount {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const ClassifierModel& model);
/// Throws FormatError for unknown versions or malformed documents.
ClassifierModel model_from_json(const nlohmann::json& document);

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

nlohmann::json spec_to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& document);

}  // namespace crowncount
