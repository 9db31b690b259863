#pragma once

#include "homotrack/gaussian.hpp"
#include "homotrack/trajectory.hpp"
#include "homotrack/vomp.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace homotrack {

/// Weights below this are raised to it (and the mixture renormalised) so that
/// component labels stay aligned across updates.
inline constexpr double kWeightFloor = 1e-12;

struct ComponentLabel {
    HWord signature;
    int submode = 1; ///< 1..N_C within the class

    friend bool operator==(const ComponentLabel&, const ComponentLabel&) = default;
};

/// One mixture component over the flattened trajectory [x0, y0, x1, y1, ...].
struct GmmComponent {
    ComponentLabel label;
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int horizon() const { return static_cast<int>(mean.size() / 2); }
    Gaussian<double> gaussian() const { return {mean, cov}; }
    Point mean_at(int t) const { return mean.segment<2>(2 * t); }
};

struct TimeMarginal {
    Point mean;
    Eigen::Matrix2d cov;
};

/// Rows/cols [2t, 2t + 1]. Throws std::out_of_range outside [0, T).
TimeMarginal marginal_at_time(const GmmComponent& comp, int t);

struct HomotopicGmm {
    std::vector<GmmComponent> components;
    int horizon = 0;

    std::size_t size() const { return components.size(); }
    std::vector<double> weights() const;
    /// Index of the highest-weight component (lowest index on ties).
    std::size_t argmax_weight() const;
};

struct GmmFitConfig {
    int components_per_class = 1; ///< N_C
    double jitter = 1e-6;         ///< added to every covariance diagonal, m^2
    std::uint64_t seed = 0;       ///< k-means initialisation
    int kmeans_restarts = 10;
};

/// One Gaussian per class (N_C = 1) or per k-means sub-cluster (N_C > 1).
/// Weight = member fraction of the whole training set.
HomotopicGmm fit_gmm(const Dataset& train, const GmmFitConfig& config);

struct SensorModel {
    double peak = 0.95;   ///< A
    double radius = 1.5;  ///< r, metres
    double noise_sd = 0.1; ///< sigma_Z, metres
};

struct Measurement {
    int t = 0;
    Point z = Point::Zero();
    Point sensor = Point::Zero();
};

struct MeasurementSet {
    std::vector<Measurement> items; ///< strictly increasing t
    double noise_sd = 0.1;

    void validate(int horizon) const;
};

/// Normalises log-weights in place into `gmm`, applying the weight floor.
/// Throws AllWeightsZero when every entry is -inf or NaN.
void assign_log_weights(HomotopicGmm& gmm, std::span<const double> log_weights);

/// Scales each component weight by b(h) of its class and renormalises.
HomotopicGmm scale_by_belief(const HomotopicGmm& gmm, const HomotopicBelief& belief);

/// Joint Gaussian conditioning of every component on all measurements, with
/// weights multiplied by each component's observation likelihood.
HomotopicGmm condition(const HomotopicGmm& gmm, const MeasurementSet& measurements);

/// Detection success probability marginalised over the component's position
/// at timestep t.
double detection_prob(const GmmComponent& comp, const Point& x, int t, double radius, double peak);

/// Weight and conditioning update after detecting the target at `z` while
/// sensing from `x` at timestep t.
HomotopicGmm update_detect(const HomotopicGmm& gmm, const HomotopicBelief& belief, const Point& x, int t,
                           const Point& z, const SensorModel& sensor);

/// Weight update after sensing from `x` at timestep t without a detection.
HomotopicGmm update_miss(const HomotopicGmm& gmm, const HomotopicBelief& belief, const Point& x, int t,
                         const SensorModel& sensor);

/// Partial signature of a component's mean polyline over timesteps [0, last_t].
HWord mean_partial_signature(const GmmComponent& comp, std::span<const Ray> rays, int last_t);

/// sum_c w_c p(h | rho_c), with rho_c read off component c's mean up to last_t.
HomotopicBelief marginalized_belief(const HomotopicGmm& gmm, const VompModel& model, std::span<const Ray> rays,
                                    int last_t);

} // namespace homotrack
