#pragma once

// Shared fixtures and oracles for the unit tests and the acceptance binary.

#include "homotrack/homotopic_gmm.hpp"
#include "homotrack/topology.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testsupport {

using homotrack::Point;
using homotrack::Polyline;

inline homotrack::Obstacle box(double x0, double y0, double x1, double y1) {
    homotrack::Obstacle ob;
    ob.shape.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    ob.rep_point = ob.shape.centroid();
    return ob;
}

// Two obstacles side by side in a 10 x 10 box; rays hang down to y = 0.
inline homotrack::Environment two_obstacle_env() {
    homotrack::Environment env;
    env.bounds = {0, 0, 10, 10};
    env.obstacles = {box(2, 4, 3, 6), box(6, 4, 7, 6)};
    return env;
}

// Crosses ray 1 and ray 2 left to right, then ray 2 back, then exits at the top.
inline Polyline two_obstacle_gamma() {
    return {{0, 2}, {8, 2}, {8, 3}, {5, 3}, {5, 10}};
}

inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double floor = 0.05) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
    Eigen::MatrixXd S = A * A.transpose() / n;
    S.diagonal().array() += floor;
    return S;
}

inline Point uniform_point(const homotrack::Bounds& b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(b.xmin, b.xmax), uy(b.ymin, b.ymax);
    return {ux(rng), uy(rng)};
}

// Point on the left, top or right edge; the bottom edge carries the ray ends.
inline Point side_point(const homotrack::Bounds& b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return {b.xmin, b.ymin + u(rng) * b.height()};
    case 1: return {b.xmin + u(rng) * b.width(), b.ymax};
    default: return {b.xmax, b.ymin + u(rng) * b.height()};
    }
}

inline bool avoids_obstacles(const Polyline& p, const homotrack::Environment& env) {
    for (const auto& ob : env.obstacles)
        if (homotrack::polyline_intersects_polygon(p, ob.shape)) return false;
    return true;
}

// Boundary-to-boundary polyline with `inner` random interior waypoints.
inline Polyline random_avoiding_polyline(const homotrack::Environment& env, int inner, std::mt19937_64& rng) {
    for (;;) {
        Polyline p{side_point(env.bounds, rng)};
        for (int i = 0; i < inner; ++i) p.push_back(uniform_point(env.bounds, rng));
        p.push_back(side_point(env.bounds, rng));
        if (avoids_obstacles(p, env)) return p;
    }
}

// Sampler for N(mean, cov).
struct MvnSampler {
    Eigen::VectorXd mean;
    Eigen::MatrixXd L;

    MvnSampler(const Eigen::VectorXd& m, const Eigen::MatrixXd& cov) : mean(m), L(cov.llt().matrixL()) {}

    Eigen::VectorXd operator()(std::mt19937_64& rng) const {
        std::normal_distribution<double> nd;
        Eigen::VectorXd z(mean.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = nd(rng);
        return mean + L * z;
    }
};

// Textbook partition formula: explicit inverse of the observed block.
struct PartitionResult {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

inline PartitionResult partition_condition(const Eigen::VectorXd& mu, const Eigen::MatrixXd& S,
                                           const std::vector<Eigen::Index>& obs, const Eigen::VectorXd& y,
                                           double noise_var) {
    const auto n = mu.size();
    const auto k = static_cast<Eigen::Index>(obs.size());
    Eigen::MatrixXd Soo(k, k), Sfo(n, k);
    Eigen::VectorXd mo(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        mo(j) = mu(obs[j]);
        for (Eigen::Index i = 0; i < k; ++i) Soo(i, j) = S(obs[i], obs[j]);
        for (Eigen::Index i = 0; i < n; ++i) Sfo(i, j) = S(i, obs[j]);
    }
    Soo.diagonal().array() += noise_var;
    const Eigen::MatrixXd Sinv = Soo.inverse();
    return {mu + Sfo * Sinv * (y - mo), S - Sfo * Sinv * Sfo.transpose()};
}

// Random 2T-dim component with a smooth mean.
inline homotrack::GmmComponent random_component(int T, std::mt19937_64& rng, double spread = 1.0) {
    std::normal_distribution<double> nd;
    homotrack::GmmComponent c;
    c.weight = 1.0;
    c.mean.resize(2 * T);
    Point p(nd(rng) * 2, nd(rng) * 2);
    const Point v(nd(rng), nd(rng));
    for (int t = 0; t < T; ++t) c.mean.segment<2>(2 * t) = p + v * t;
    c.cov = random_spd(2 * T, rng, 0.05) * spread;
    return c;
}

} // namespace testsupport

#include "homotrack/dpi.hpp"

#include <map>

namespace testsupport {

// Mutual informations from entropies, I = H(z) - H(z | .), built from a
// per-trajectory observation distribution.
inline homotrack::DpiResult dpi_entropy_oracle(const homotrack::DpiToy& toy) {
    const std::size_t n = toy.trajectories.size();
    std::vector<std::map<std::vector<int>, double>> pz_given_y(n);
    for (std::size_t y = 0; y < n; ++y) {
        std::map<std::vector<int>, double> cur{{{}, 1.0}};
        for (std::size_t k = 0; k < toy.channels.size(); ++k) {
            const int cell = toy.trajectories[y][static_cast<std::size_t>(toy.observed_timesteps[k])];
            std::map<std::vector<int>, double> next;
            for (const auto& [z, p] : cur)
                for (Eigen::Index o = 0; o < toy.channels[k].cols(); ++o) {
                    auto z2 = z;
                    z2.push_back(static_cast<int>(o));
                    next[z2] += p * toy.channels[k](cell, o);
                }
            cur = std::move(next);
        }
        pz_given_y[y] = std::move(cur);
    }
    auto entropy = [](const std::map<std::vector<int>, double>& d) {
        double h = 0;
        for (const auto& [z, p] : d)
            if (p > 0) h -= p * std::log(p);
        return h;
    };
    std::map<std::vector<int>, double> pz;
    std::map<int, std::map<std::vector<int>, double>> pz_given_h;
    std::map<int, double> ph;
    double h_given_y = 0;
    for (std::size_t y = 0; y < n; ++y) {
        const double py = toy.probabilities[y];
        h_given_y += py * entropy(pz_given_y[y]);
        ph[toy.classes[y]] += py;
        for (const auto& [z, p] : pz_given_y[y]) {
            pz[z] += py * p;
            pz_given_h[toy.classes[y]][z] += py * p;
        }
    }
    double h_given_h = 0;
    for (auto& [h, d] : pz_given_h) {
        for (auto& [z, p] : d) p /= ph[h];
        h_given_h += ph[h] * entropy(d);
    }
    const double hz = entropy(pz);
    return {hz - h_given_y, hz - h_given_h};
}

} // namespace testsupport

#include "homotrack/planner.hpp"

namespace testsupport {

// Small OPTW instance with at least one node reachable from the start.
inline homotrack::OptwInstance random_optw(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coord(0, 20), reward(0.05, 1.0);
    std::uniform_int_distribution<int> open(0, 25), width(0, 8);
    for (;;) {
        homotrack::OptwInstance inst;
        inst.start = {10, 10};
        inst.start_time = 0;
        inst.speed = 1.0;
        inst.step = 1.0;
        for (int i = 0; i < n; ++i) {
            homotrack::OptwNode node;
            node.id = i;
            node.location = {coord(rng), coord(rng)};
            node.t_open = open(rng);
            node.t_close = node.t_open + width(rng);
            node.reward = reward(rng);
            inst.nodes.push_back(node);
        }
        for (const auto& node : inst.nodes)
            if (inst.arrival(inst.start, inst.start_time, node) >= 0) return inst;
    }
}

} // namespace testsupport
