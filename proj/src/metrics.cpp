#include "homotrack/metrics.hpp"

#include "homotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace homotrack {

HomotopicGmm ground_truth_gmm(const HomotopicGmm& prior, const Trajectory& test, double noise_sd) {
    if (static_cast<int>(test.size()) != prior.horizon) throw Error("test trajectory is not canonicalised");
    MeasurementSet all;
    all.noise_sd = noise_sd;
    for (int t = 0; t < prior.horizon; ++t) all.items.push_back({t, test.positions[static_cast<std::size_t>(t)], {}});
    return condition(prior, all);
}

std::vector<double> displacement_error(const HomotopicGmm& posterior, const Trajectory& truth) {
    const auto& best = posterior.components[posterior.argmax_weight()];
    std::vector<double> de;
    de.reserve(truth.size());
    for (int t = 0; t < static_cast<int>(truth.size()); ++t) {
        de.push_back((truth.positions[static_cast<std::size_t>(t)] - best.mean_at(t)).norm());
    }
    return de;
}

double average_displacement_error(const std::vector<double>& de) {
    if (de.empty()) return 0.0;
    return std::accumulate(de.begin(), de.end(), 0.0) / static_cast<double>(de.size());
}

double weight_kld(const HomotopicGmm& gt, const HomotopicGmm& observed) {
    if (gt.size() != observed.size()) throw LabelMismatch("mixtures have different component counts");
    double kl = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!(gt.components[i].label == observed.components[i].label)) {
            throw LabelMismatch("component " + std::to_string(i) + " labels differ");
        }
        const double p = gt.components[i].weight;
        if (p <= 0.0) continue;
        const double q = std::max(observed.components[i].weight, kWeightFloor);
        kl += p * (std::log(p) - std::log(q));
    }
    return std::max(kl, 0.0);
}

double variational_mi(const HomotopicGmm& f, const HomotopicGmm& g) {
    std::vector<Gaussian<double>> fg;
    std::vector<Gaussian<double>> gg;
    for (const auto& c : f.components) fg.push_back(c.gaussian());
    for (const auto& c : g.components) gg.push_back(c.gaussian());
    std::vector<FactoredGaussian<double>> ff;
    std::vector<FactoredGaussian<double>> gf;
    for (const auto& x : fg) ff.emplace_back(x);
    for (const auto& x : gg) gf.emplace_back(x);

    // log-sum-exp, KL terms between sharp trajectory Gaussians reach thousands of nats
    auto log_mix = [](const HomotopicGmm& m, const auto& kl_to) {
        std::vector<double> terms;
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < m.size(); ++b) {
            terms.push_back(std::log(m.components[b].weight) - kl_to(b));
            hi = std::max(hi, terms.back());
        }
        double s = 0.0;
        for (double v : terms) s += std::exp(v - hi);
        return hi + std::log(s);
    };
    double d = 0.0;
    for (std::size_t a = 0; a < ff.size(); ++a) {
        const double num = log_mix(f, [&](std::size_t a2) { return kl_divergence(ff[a], ff[a2]); });
        const double den = log_mix(g, [&](std::size_t b) { return kl_divergence(ff[a], gf[b]); });
        d += f.components[a].weight * (num - den);
    }
    return d;
}

bool success(const ExperimentTrace& trace) {
    for (const auto& m : trace.detections.items) {
        if (m.t > 0) return true;
    }
    return false;
}

} // namespace homotrack
