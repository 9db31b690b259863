#pragma once

#include "homotrack/topology.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace homotrack {

inline constexpr int kDefaultHorizon = 100;

struct Trajectory {
    std::string id;
    Polyline positions;
    std::vector<double> timestamps;

    std::size_t size() const { return positions.size(); }
};

/// Resamples to `T` points at uniform fractions of the elapsed time. The
/// result is indexed by timestep: timestamps become 0, 1, ..., T - 1.
/// Throws DegenerateTrajectory for zero duration or fewer than two points.
Trajectory canonicalize(const Trajectory& traj, int T = kDefaultHorizon);

/// [x0, y0, x1, y1, ...]
Eigen::VectorXd flatten(const Trajectory& traj);

bool endpoints_on_boundary(const Trajectory& traj, const Bounds& bounds);

/// Trajectories plus, once clustered, one full unreduced h-signature each.
struct Dataset {
    std::vector<Trajectory> trajectories;
    std::vector<HWord> signatures;

    std::size_t size() const { return trajectories.size(); }
    bool labelled() const { return signatures.size() == trajectories.size(); }
};

using ClassMap = std::map<HWord, std::vector<std::string>>;

struct CsvOptions {
    std::optional<Bounds> bounds;        ///< enables the boundary-endpoint check
    bool skip_boundary_violations = false;
};

/// Reads `id,t,x,y` rows. Rows of one id must be contiguous and strictly
/// increasing in t.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Labels every trajectory with its full unreduced h-signature.
Dataset cluster_by_signature(Dataset dataset, std::span<const Ray> rays);
ClassMap class_map(const Dataset& dataset);

/// Keeps only trajectories whose class satisfies `keep`.
Dataset filter_classes(const Dataset& dataset, const std::function<bool(const HWord&)>& keep);

struct GpParams {
    double length_scale = 10.0; ///< in timesteps
    double amplitude = 0.3;     ///< pointwise standard deviation, metres
    int max_rejections = 100;   ///< per accepted sample
};

/// Draws smooth perturbations of each template from a squared-exponential
/// process on the time index (independent per coordinate) pinned to zero at
/// both ends. Samples that touch an obstacle, leave the bounds, or change
/// the template's full signature are redrawn.
Dataset synthesize_dataset(const Environment& env, std::span<const Ray> rays,
                           std::span<const Trajectory> templates, int samples_per_template,
                           const GpParams& params, std::uint64_t seed);

/// Per-class seeded split into disjoint train/test sets.
std::pair<Dataset, Dataset> split(const Dataset& dataset, int train_per_class, int test_per_class,
                                  std::uint64_t seed);

/// Mean over trajectories of path length / elapsed time.
double mean_speed(const Dataset& dataset);

} // namespace homotrack
