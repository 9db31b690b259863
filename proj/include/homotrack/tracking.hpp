#pragma once

#include "homotrack/homotopic_gmm.hpp"
#include "homotrack/planner.hpp"
#include "homotrack/topology.hpp"
#include "homotrack/trajectory.hpp"
#include "homotrack/vomp.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace homotrack {

enum class GainKind { homotopic, metric };

std::string to_string(GainKind kind);
GainKind parse_gain_kind(const std::string& text);

struct PlannerConfig {
    int grid_nx = 30;
    int grid_ny = 30;
    double threshold = 0.05;
    ThresholdMode threshold_mode = ThresholdMode::relative;
    double min_gain = 1e-6;   ///< cubes whose max is at or below this are treated as empty
    int max_nodes = 24;       ///< OPTW size cap, 0 for none
    double kappa = 1.0;
    int iterations = 10000;
    double robot_speed = 0.0; ///< m/s; non-positive means speed_factor x target speed
    double speed_factor = 2.0;
    double step = 1.0;        ///< seconds per timestep
    double kappa_r = 0.01;    ///< metric gain noise growth, per m^2
};

struct TrackingConfig {
    SensorModel sensor;
    PlannerConfig planner;
    std::uint64_t seed = 0;
};

/// Everything the tracker knows before the run starts.
struct TrackingModel {
    Environment env;
    std::vector<Ray> rays;
    HomotopicGmm prior;
    VompModel vomp;
    double target_speed = 0.0; ///< mean training speed, m/s

    double robot_speed(const PlannerConfig& planner) const;
};

struct Posterior {
    HomotopicGmm gmm;
    HomotopicBelief belief;
};

struct Miss {
    int t = 0;
    Point sensor = Point::Zero();
};

/// Posterior from the prior given every detection and miss so far: joint
/// conditioning on detections, detection/miss probability factors, then one
/// scaling by the marginalised homotopic belief.
Posterior compute_posterior(const TrackingModel& model, const MeasurementSet& detections,
                            const std::vector<Miss>& misses, const SensorModel& sensor);

std::unique_ptr<GainField> make_gain_field(GainKind kind, const TrackingModel& model, const Posterior& post,
                                           const TrackingConfig& config, int t_begin);

struct StepRecord {
    int t = 0;
    Point robot = Point::Zero();
    int action = -1;               ///< chosen OPTW node id, -1 when idle
    std::optional<Point> goal;
    bool attempted = false;
    bool detected = false;
    std::optional<Point> z;
    std::uint64_t belief_hash = 0;
    bool fallback = false;         ///< idle or threshold fallback this step
};

struct ExperimentTrace {
    std::string target_id;
    GainKind kind = GainKind::homotopic;
    std::vector<StepRecord> steps;  ///< t = 0 .. T-1
    MeasurementSet detections;
    std::vector<Miss> misses;
    Posterior final;
    double runtime_s = 0.0;
    double first_cube_occupancy = 0.0; ///< share of t = 1 cube cells above 1% of its max

    int measurement_count() const { return static_cast<int>(detections.items.size()); }
    int fallback_steps() const;
};

/// Called after every detection with the updated posterior (not timed).
using MeasurementObserver = std::function<void(int index, const Posterior&)>;

/// Closed-loop run against one ground-truth trajectory of length T.
ExperimentTrace replan_loop(const TrackingModel& model, const Trajectory& target, GainKind kind,
                            const TrackingConfig& config, const MeasurementObserver& observer = {});

std::uint64_t belief_hash(const HomotopicBelief& belief);

nlohmann::json trace_to_json(const ExperimentTrace& trace);

} // namespace homotrack
