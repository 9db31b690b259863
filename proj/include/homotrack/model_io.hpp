#pragma once

#include "homotrack/homotopic_gmm.hpp"
#include "homotrack/vomp.hpp"

#include <json.hpp>

#include <filesystem>

namespace homotrack {

/// Trained artefacts written by `fit` and read by `track` / `heatcube`.
struct SavedModel {
    HomotopicGmm gmm;
    VompModel vomp;
    GmmFitConfig fit;
    double target_speed = 0.0;
};

nlohmann::json gmm_to_json(const HomotopicGmm& gmm);
HomotopicGmm gmm_from_json(const nlohmann::json& j);

void save_model(const SavedModel& model, const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

} // namespace homotrack
