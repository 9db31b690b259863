#include "homotrack/homotopic_gmm.hpp"

#include "homotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace homotrack {

TimeMarginal marginal_at_time(const GmmComponent& comp, int t) {
    if (t < 0 || t >= comp.horizon()) {
        throw std::out_of_range("timestep " + std::to_string(t) + " outside [0, " +
                                std::to_string(comp.horizon()) + ")");
    }
    return {comp.mean.segment<2>(2 * t), comp.cov.block<2, 2>(2 * t, 2 * t)};
}

std::vector<double> HomotopicGmm::weights() const {
    std::vector<double> w;
    w.reserve(components.size());
    for (const auto& c : components) w.push_back(c.weight);
    return w;
}

std::size_t HomotopicGmm::argmax_weight() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < components.size(); ++i) {
        if (components[i].weight > components[best].weight) best = i;
    }
    return best;
}

void MeasurementSet::validate(int horizon) const {
    int prev = -1;
    for (const auto& m : items) {
        if (m.t <= prev || m.t < 0 || m.t >= horizon) {
            throw Error("measurement timesteps must be strictly increasing within [0, T)");
        }
        prev = m.t;
    }
}

namespace {

struct Cluster {
    std::vector<std::size_t> members;
};

// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
std::vector<Cluster> kmeans(const std::vector<Eigen::VectorXd>& points, int k, int restarts, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<Cluster> best;
    double best_inertia = std::numeric_limits<double>::infinity();

    for (int r = 0; r < restarts; ++r) {
        std::vector<Eigen::VectorXd> centres;
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        centres.push_back(points[pick(rng)]);
        while (static_cast<int>(centres.size()) < k) {
            std::vector<double> d2(n);
            for (std::size_t i = 0; i < n; ++i) {
                double m = std::numeric_limits<double>::infinity();
                for (const auto& c : centres) m = std::min(m, (points[i] - c).squaredNorm());
                d2[i] = m;
            }
            std::discrete_distribution<std::size_t> choose(d2.begin(), d2.end());
            centres.push_back(points[choose(rng)]);
        }

        std::vector<int> assign(n, -1);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                int arg = 0;
                double m = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = (points[i] - centres[c]).squaredNorm();
                    if (d < m) {
                        m = d;
                        arg = c;
                    }
                }
                if (assign[i] != arg) {
                    assign[i] = arg;
                    changed = true;
                }
            }
            for (int c = 0; c < k; ++c) {
                Eigen::VectorXd sum = Eigen::VectorXd::Zero(points[0].size());
                int count = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (assign[i] == c) {
                        sum += points[i];
                        ++count;
                    }
                }
                if (count > 0) centres[c] = sum / count;
            }
            if (!changed) break;
        }

        double inertia = 0.0;
        std::vector<Cluster> clusters(k);
        for (std::size_t i = 0; i < n; ++i) {
            inertia += (points[i] - centres[assign[i]]).squaredNorm();
            clusters[assign[i]].members.push_back(i);
        }
        const bool any_empty = std::any_of(clusters.begin(), clusters.end(),
                                           [](const Cluster& c) { return c.members.empty(); });
        if (!any_empty && inertia < best_inertia) {
            best_inertia = inertia;
            best = std::move(clusters);
        }
    }
    if (best.empty()) throw NumericalFailure("k-means produced an empty cluster in every restart");
    return best;
}

GmmComponent sample_component(const std::vector<Eigen::VectorXd>& points, const std::vector<std::size_t>& members,
                              double jitter) {
    const Eigen::Index dim = points[members.front()].size();
    GmmComponent comp;
    comp.mean = Eigen::VectorXd::Zero(dim);
    for (auto i : members) comp.mean += points[i];
    comp.mean /= static_cast<double>(members.size());
    comp.cov = Eigen::MatrixXd::Zero(dim, dim);
    if (members.size() > 1) {
        Eigen::MatrixXd centred(dim, static_cast<Eigen::Index>(members.size()));
        for (std::size_t j = 0; j < members.size(); ++j) centred.col(static_cast<Eigen::Index>(j)) = points[members[j]] - comp.mean;
        comp.cov = centred * centred.transpose() / static_cast<double>(members.size() - 1);
    }
    comp.cov.diagonal().array() += jitter;
    return comp;
}

} // namespace

HomotopicGmm fit_gmm(const Dataset& train, const GmmFitConfig& config) {
    if (config.components_per_class < 1) throw ConfigError("N_C must be at least 1");
    const ClassMap classes = class_map(train);
    if (classes.empty()) throw InsufficientClassMembers("training set is empty");

    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < train.size(); ++i) index_of[train.trajectories[i].id] = i;

    HomotopicGmm gmm;
    gmm.horizon = static_cast<int>(train.trajectories.front().size());
    std::mt19937_64 rng(config.seed);
    const double total = static_cast<double>(train.size());

    for (const auto& [word, ids] : classes) {
        const int nc = config.components_per_class;
        if (static_cast<int>(ids.size()) < nc + 1) {
            throw InsufficientClassMembers("class " + word.str() + " has " + std::to_string(ids.size()) +
                                           " members, needs at least " + std::to_string(nc + 1));
        }
        std::vector<Eigen::VectorXd> points;
        points.reserve(ids.size());
        for (const auto& id : ids) {
            const auto& traj = train.trajectories[index_of.at(id)];
            if (static_cast<int>(traj.size()) != gmm.horizon) {
                throw Error("trajectory '" + id + "' is not canonicalised to T = " + std::to_string(gmm.horizon));
            }
            points.push_back(flatten(traj));
        }

        std::vector<Cluster> clusters;
        if (nc == 1) {
            Cluster all;
            for (std::size_t i = 0; i < points.size(); ++i) all.members.push_back(i);
            clusters.push_back(std::move(all));
        } else {
            clusters = kmeans(points, nc, config.kmeans_restarts, rng);
        }
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            GmmComponent comp = sample_component(points, clusters[c].members, config.jitter);
            comp.label = {word, static_cast<int>(c) + 1};
            comp.weight = static_cast<double>(clusters[c].members.size()) / total;
            gmm.components.push_back(std::move(comp));
        }
    }
    return gmm;
}

void assign_log_weights(HomotopicGmm& gmm, std::span<const double> log_weights) {
    double max_lw = -std::numeric_limits<double>::infinity();
    for (double lw : log_weights) {
        if (!std::isnan(lw)) max_lw = std::max(max_lw, lw);
    }
    if (!std::isfinite(max_lw)) throw AllWeightsZero("every component weight vanished");

    double sum = 0.0;
    for (std::size_t i = 0; i < gmm.components.size(); ++i) {
        const double lw = log_weights[i];
        const double w = std::isnan(lw) ? 0.0 : std::exp(lw - max_lw);
        gmm.components[i].weight = w;
        sum += w;
    }
    bool floored = false;
    for (auto& c : gmm.components) {
        c.weight /= sum;
        if (c.weight < kWeightFloor) {
            c.weight = kWeightFloor;
            floored = true;
        }
    }
    if (floored) {
        double s = 0.0;
        for (const auto& c : gmm.components) s += c.weight;
        for (auto& c : gmm.components) c.weight /= s;
    }
}

namespace {

std::vector<double> log_weights_of(const HomotopicGmm& gmm) {
    std::vector<double> lw;
    lw.reserve(gmm.size());
    for (const auto& c : gmm.components) lw.push_back(std::log(c.weight));
    return lw;
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

} // namespace

HomotopicGmm scale_by_belief(const HomotopicGmm& gmm, const HomotopicBelief& belief) {
    HomotopicGmm out = gmm;
    auto lw = log_weights_of(gmm);
    for (std::size_t i = 0; i < gmm.size(); ++i) lw[i] += safe_log(belief.prob(gmm.components[i].label.signature));
    assign_log_weights(out, lw);
    return out;
}

HomotopicGmm condition(const HomotopicGmm& gmm, const MeasurementSet& measurements) {
    if (measurements.items.empty()) return gmm;
    measurements.validate(gmm.horizon);

    std::vector<Eigen::Index> observed;
    Eigen::VectorXd values(2 * static_cast<Eigen::Index>(measurements.items.size()));
    for (std::size_t j = 0; j < measurements.items.size(); ++j) {
        const auto& m = measurements.items[j];
        observed.push_back(2 * m.t);
        observed.push_back(2 * m.t + 1);
        values.segment<2>(2 * static_cast<Eigen::Index>(j)) = m.z;
    }
    const double noise_var = measurements.noise_sd * measurements.noise_sd;

    HomotopicGmm out = gmm;
    auto lw = log_weights_of(gmm);
    for (std::size_t i = 0; i < gmm.size(); ++i) {
        auto res = condition_on_coordinates<double>(gmm.components[i].gaussian(), observed, values, noise_var);
        out.components[i].mean = std::move(res.posterior.mean);
        out.components[i].cov = std::move(res.posterior.cov);
        lw[i] += res.log_likelihood;
    }
    assign_log_weights(out, lw);
    return out;
}

double detection_prob(const GmmComponent& comp, const Point& x, int t, double radius, double peak) {
    const TimeMarginal m = marginal_at_time(comp, t);
    return detection_marginal<double>(x, m.mean, m.cov, radius, peak);
}

HomotopicGmm update_detect(const HomotopicGmm& gmm, const HomotopicBelief& belief, const Point& x, int t,
                           const Point& z, const SensorModel& sensor) {
    MeasurementSet single{{{t, z, x}}, sensor.noise_sd};
    single.validate(gmm.horizon);
    const std::vector<Eigen::Index> observed{2 * t, 2 * t + 1};
    const Eigen::VectorXd value = z;
    const double noise_var = sensor.noise_sd * sensor.noise_sd;

    HomotopicGmm out = gmm;
    auto lw = log_weights_of(gmm);
    for (std::size_t i = 0; i < gmm.size(); ++i) {
        const auto& comp = gmm.components[i];
        const double gamma = detection_prob(comp, x, t, sensor.radius, sensor.peak);
        auto res = condition_on_coordinates<double>(comp.gaussian(), observed, value, noise_var);
        lw[i] += safe_log(gamma) + safe_log(belief.prob(comp.label.signature)) + res.log_likelihood;
        out.components[i].mean = std::move(res.posterior.mean);
        out.components[i].cov = std::move(res.posterior.cov);
    }
    assign_log_weights(out, lw);
    return out;
}

HomotopicGmm update_miss(const HomotopicGmm& gmm, const HomotopicBelief& belief, const Point& x, int t,
                         const SensorModel& sensor) {
    HomotopicGmm out = gmm;
    auto lw = log_weights_of(gmm);
    for (std::size_t i = 0; i < gmm.size(); ++i) {
        const auto& comp = gmm.components[i];
        const double gamma = detection_prob(comp, x, t, sensor.radius, sensor.peak);
        lw[i] += safe_log(1.0 - gamma) + safe_log(belief.prob(comp.label.signature));
    }
    assign_log_weights(out, lw);
    return out;
}

HWord mean_partial_signature(const GmmComponent& comp, std::span<const Ray> rays, int last_t) {
    last_t = std::min(last_t, comp.horizon() - 1);
    Polyline path;
    path.reserve(static_cast<std::size_t>(std::max(last_t + 1, 0)));
    for (int t = 0; t <= last_t; ++t) path.push_back(comp.mean_at(t));
    return partial_h_signature(path, rays);
}

HomotopicBelief marginalized_belief(const HomotopicGmm& gmm, const VompModel& model, std::span<const Ray> rays,
                                    int last_t) {
    std::map<HWord, double> mass;
    for (const auto& comp : gmm.components) {
        const HomotopicBelief b = homotopic_belief(model, mean_partial_signature(comp, rays, last_t));
        for (std::size_t i = 0; i < b.support.size(); ++i) mass[b.support[i]] += comp.weight * b.probabilities[i];
    }
    HomotopicBelief out;
    double total = 0.0;
    for (const auto& [word, p] : mass) total += p;
    for (const auto& [word, p] : mass) {
        out.support.push_back(word);
        out.probabilities.push_back(p / total);
    }
    return out;
}

} // namespace homotrack
