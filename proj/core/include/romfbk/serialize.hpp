#pragma once

#include "romfbk/artifact.hpp"
#include "romfbk/controller.hpp"
#include "romfbk/dataset.hpp"
#include "romfbk/reducer.hpp"
#include "romfbk/training.hpp"

#include <filesystem>

namespace romfbk {

// Conversions between in-memory types and artifacts. `extra` lands in
// meta and is returned unchanged by the loaders' artifact.

Artifact to_artifact(const SnapshotSet& data, const nlohmann::json& extra = nlohmann::json::object());
SnapshotSet dataset_from_artifact(const Artifact& a);

Artifact to_artifact(const Reducer& r);
Reducer reducer_from_artifact(const Artifact& a);

Artifact to_artifact(const ControllerModel& m, const nlohmann::json& extra = nlohmann::json::object());
ControllerModel model_from_artifact(const Artifact& a);

/// Wall-clock fields are stored under meta.timing.
Artifact to_artifact(const LoopReport& r);
LoopReport report_from_artifact(const Artifact& a);

void save_dataset(const std::filesystem::path& path, const SnapshotSet& data,
                  const nlohmann::json& extra = nlohmann::json::object());
SnapshotSet load_dataset(const std::filesystem::path& path);
void save_reducer(const std::filesystem::path& path, const Reducer& r);
Reducer load_reducer(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ControllerModel& m,
                const nlohmann::json& extra = nlohmann::json::object());
ControllerModel load_model(const std::filesystem::path& path);
void save_report(const std::filesystem::path& path, const LoopReport& r);
LoopReport load_report(const std::filesystem::path& path);

nlohmann::json to_json(const FomConfig& f);
FomConfig fom_from_json(const nlohmann::json& j);

}  // namespace romfbk
