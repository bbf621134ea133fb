#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "armlet/config.hpp"
#include "armlet/model.hpp"

namespace armlet {

inline constexpr int kModelFormatVersion = 1;

enum class Precision { kFloat32, kFloat64 };

nlohmann::json config_to_json(const ArmConfig& cfg);
/// Missing keys keep their defaults; unknown keys are ignored.
ArmConfig config_from_json(const nlohmann::json& j, ArmConfig base = {});

/// Model document: format_version, model_kind, precision, config, schema and
/// every tensor as a nested row list.
nlohmann::json model_to_json(const Model& model, Precision precision = Precision::kFloat32);
std::unique_ptr<Model> model_from_json(const nlohmann::json& doc);

void save_model(const Model& model, const std::filesystem::path& path,
                Precision precision = Precision::kFloat32);
std::unique_ptr<Model> load_model(const std::filesystem::path& path);

}  // namespace armlet
