#pragma once

#include "homotrack/homotopic_gmm.hpp"
#include "homotrack/topology.hpp"
#include "homotrack/vomp.hpp"

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace homotrack {

/// Cap on infinite KL terms, nats.
inline constexpr double kKlCap = 1e3;

/// Standard normal CDF.
double normal_cdf(double x);

/// P(X > h, Y > k) for standard bivariate normal (X, Y) with correlation r.
double bivariate_normal_upper(double h, double k, double r);

/// KL between two discrete beliefs, sum over the support of `b_next` of
/// b_next log(b_next / b_prev). Terms where b_prev vanishes are capped.
double homotopic_kl(const HomotopicBelief& b_prev, const HomotopicBelief& b_next);

struct CrossingProb {
    double positive = 0.0; ///< P(+k): signed distance goes from negative to positive
    double negative = 0.0; ///< P(-k)

    double total() const { return positive + negative; }
};

/// Probability that the component trajectory crosses `ray` between t and t+1.
/// Integrates over the crossing fraction of the straight step, closed form
/// inside. Requires 0 <= t < T-1.
CrossingProb crossing_prob(const GmmComponent& comp, const Ray& ray, int t);

/// One possible letter appended to the partial signature, with its probability.
struct CrossingEvent {
    int letter = 0;
    double probability = 0.0;
};

/// sum_l p(l) KL(b | H(rho + l), b | H(rho)) over events with nonzero mass.
/// Zero when b has no mass on words compatible with rho.
double expected_belief_divergence(const HomotopicBelief& belief, const HWord& rho,
                                  std::span<const CrossingEvent> events);

/// Scalar field over (sensing location, timestep).
class GainField {
public:
    virtual ~GainField() = default;
    virtual double operator()(const Point& x, int t) const = 0;
    /// False when every location at timestep t is known to score zero.
    virtual bool slice_active(int) const { return true; }
};

struct GainQuery {
    Point x = Point::Zero();
    int t = 0;
    const HomotopicGmm* gmm = nullptr;
    const HomotopicBelief* belief = nullptr;
    std::span<const Ray> rays;
    SensorModel sensor;
};

namespace detail {

// Per (component, t) quantities reused across every grid cell.
struct DetectionCache {
    Point mean;
    Eigen::Matrix2d spread_inv; // (cov + r^2 I)^-1
    double beta = 0.0;
    Eigen::Matrix2d cov;

    double gamma(const Point& x) const {
        const Point d = x - mean;
        return beta * std::exp(-0.5 * d.dot(spread_inv * d));
    }
};

} // namespace detail

/// Homotopic expected gain:
///   sum_c w_c gamma_c(x, t) sum_l p_c(l; t-1 -> t) KL(b | H(rho_c + l), b | H(rho_c))
/// with rho_c read off component c's mean over [0, t-1]. Zero at t = 0.
class HomotopicGainField : public GainField {
public:
    HomotopicGainField(const HomotopicGmm& gmm, const HomotopicBelief& belief, std::span<const Ray> rays,
                       const SensorModel& sensor, int t_begin = 0);

    double operator()(const Point& x, int t) const override;
    bool slice_active(int t) const override;

    /// w_c K_c(t), the location-independent factor of component c at t.
    double component_factor(std::size_t c, int t) const;

private:
    int horizon_ = 0;
    int t_begin_ = 0;
    std::vector<std::vector<double>> factor_;                   // [c][t]
    std::vector<std::vector<detail::DetectionCache>> cache_;    // [c][t], filled where factor > 0
    std::vector<char> active_;
};

/// Metric baseline gain: p(d|x) sum_h w_h [log det(S + R) - log det R], i.e.
/// log det S - log det S_post for a virtual measurement with noise
/// R(x) = (sigma_Z^2 + kappa_R |x - mu|^2) I, S the 2x2 marginal at t.
class MetricGainField : public GainField {
public:
    MetricGainField(const HomotopicGmm& gmm, const SensorModel& sensor, double kappa_r, int t_begin = 0);

    double operator()(const Point& x, int t) const override;

private:
    int horizon_ = 0;
    int t_begin_ = 0;
    double noise_var_ = 0.0;
    double kappa_r_ = 0.0;
    std::vector<double> weights_;
    std::vector<std::vector<detail::DetectionCache>> cache_; // [c][t]
};

double expected_homotopic_gain(const GainQuery& q);
double metric_gain(const GainQuery& q, double kappa_r);

/// p(d|x) sum_h w_h log det(S + R), the raw entropy surrogate.
double metric_entropy_surrogate(const GainQuery& q, double kappa_r);

} // namespace homotrack
