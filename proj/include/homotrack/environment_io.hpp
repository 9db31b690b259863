#pragma once

#include "homotrack/topology.hpp"

#include <json.hpp>

#include <filesystem>

namespace homotrack {

/// Environment file layout:
///   { "bounds": [xmin, ymin, xmax, ymax],
///     "obstacles": [ { "vertices": [[x, y], ...],
///                      "rep_point": [x, y],        (optional, centroid)
///                      "ray_endpoint": [x, y] } ] } (optional)
Environment environment_from_json(const nlohmann::json& j);
nlohmann::json environment_to_json(const Environment& env);

Environment load_environment(const std::filesystem::path& path);
void save_environment(const Environment& env, const std::filesystem::path& path);

} // namespace homotrack
