#pragma once

#include "homotrack/homotopic_gmm.hpp"
#include "homotrack/tracking.hpp"
#include "homotrack/trajectory.hpp"
#include "homotrack/vomp.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace homotrack {

struct DatasetConfig {
    std::string preset = "three_obstacle"; ///< used when no CSV paths are given
    std::optional<std::filesystem::path> train_csv;
    std::optional<std::filesystem::path> test_csv;
    int horizon = kDefaultHorizon;
    int train_per_class = 48;
    int test_per_class = 12;
    GpParams gp{30.0, 0.35, 100};
    std::uint64_t seed = 7;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::vector<GainKind> gain_kinds{GainKind::homotopic, GainKind::metric};
    bool include_empty_class = false;
    int curve_measurements = 10; ///< KLD / D_var tracked for the first n measurements
    int max_test_per_class = 0;  ///< 0 keeps every test trajectory
};

struct BenchmarkConfig {
    std::optional<std::filesystem::path> environment_file; ///< preset layout when unset
    DatasetConfig dataset;
    TrackingConfig tracking;
    VompConfig vomp;
    GmmFitConfig gmm;
    RunConfig run;

    static BenchmarkConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Environment, rays, fitted models and the held-out trajectories.
struct PreparedBenchmark {
    TrackingModel model;
    Dataset train;
    Dataset test;
};

PreparedBenchmark prepare_benchmark(const BenchmarkConfig& config);

struct RunRow {
    std::string target;
    std::string target_class;
    GainKind kind = GainKind::homotopic;
    int measurements = 0;
    double ade = 0.0;
    bool success = false;
    double runtime_s = 0.0;
    double final_kld = 0.0;
    double final_dvar = 0.0;
    double first_cube_occupancy = 0.0;
    int fallback_steps = 0;
    std::string error; ///< non-empty when the run threw
};

struct KindSummary {
    int runs = 0;
    double median_measurements = 0.0;
    double q1_measurements = 0.0;
    double q3_measurements = 0.0;
    double median_ade = 0.0;
    double success_rate = 0.0;
    double total_runtime_s = 0.0;
    double visitation_top5 = 0.0;       ///< mass share of the five most visited cells
    double mean_cube_occupancy = 0.0;
};

struct BenchmarkReport {
    std::vector<RunRow> rows;
    /// kind -> detection-attempt counts per grid cell
    std::map<GainKind, std::vector<int>> visitation;
    /// kind -> series name ("kld", "dvar", "de") -> index -> samples
    std::map<GainKind, std::map<std::string, std::vector<std::vector<double>>>> curves;
    GridSpec grid;

    KindSummary summary(GainKind kind) const;
};

double quantile(std::vector<double> v, double q);

BenchmarkReport run_benchmark(const BenchmarkConfig& config);
BenchmarkReport run_benchmark(const BenchmarkConfig& config, const PreparedBenchmark& prepared);

/// metrics.csv, visitation.csv, curves.csv and manifest.json.
void write_report(const BenchmarkReport& report, const BenchmarkConfig& config, const std::filesystem::path& dir);

} // namespace homotrack
