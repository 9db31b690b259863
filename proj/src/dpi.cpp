#include "homotrack/dpi.hpp"

#include "homotrack/errors.hpp"

#include <cmath>
#include <map>
#include <random>
#include <set>

namespace homotrack {

DpiResult dpi_check(const DpiToy& toy) {
    const std::size_t n = toy.trajectories.size();
    if (toy.probabilities.size() != n || toy.classes.size() != n) throw Error("toy arrays have mismatched sizes");
    if (toy.channels.size() != toy.observed_timesteps.size()) throw Error("one channel per observed timestep");

    double z_states = 1.0;
    std::vector<Eigen::Index> radix;
    for (const auto& ch : toy.channels) {
        radix.push_back(ch.cols());
        z_states *= static_cast<double>(ch.cols());
    }
    if (z_states * static_cast<double>(n) > kDpiStateBudget) {
        throw ToyTooLarge("toy has more than 1e7 (trajectory, observation) states");
    }
    const auto nz = static_cast<std::size_t>(z_states);

    // joint[y][z]
    std::vector<std::vector<double>> joint(n, std::vector<double>(nz, 0.0));
    std::vector<Eigen::Index> digit(radix.size());
    for (std::size_t z = 0; z < nz; ++z) {
        std::size_t rem = z;
        for (std::size_t k = 0; k < radix.size(); ++k) {
            digit[k] = static_cast<Eigen::Index>(rem % static_cast<std::size_t>(radix[k]));
            rem /= static_cast<std::size_t>(radix[k]);
        }
        for (std::size_t y = 0; y < n; ++y) {
            double p = toy.probabilities[y];
            for (std::size_t k = 0; k < radix.size(); ++k) {
                const int cell = toy.trajectories[y].at(static_cast<std::size_t>(toy.observed_timesteps[k]));
                p *= toy.channels[k](cell, digit[k]);
            }
            joint[y][z] = p;
        }
    }

    std::vector<double> pz(nz, 0.0);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < nz; ++z) pz[z] += joint[y][z];

    std::map<int, std::vector<double>> class_joint;
    std::map<int, double> pclass;
    for (std::size_t y = 0; y < n; ++y) {
        auto& row = class_joint[toy.classes[y]];
        row.resize(nz, 0.0);
        for (std::size_t z = 0; z < nz; ++z) row[z] += joint[y][z];
        pclass[toy.classes[y]] += toy.probabilities[y];
    }

    auto mi_term = [](double pj, double pa, double pb) {
        return pj > 0.0 ? pj * std::log(pj / (pa * pb)) : 0.0;
    };
    DpiResult out;
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < nz; ++z) out.i_metric += mi_term(joint[y][z], toy.probabilities[y], pz[z]);
    for (const auto& [h, row] : class_joint)
        for (std::size_t z = 0; z < nz; ++z) out.i_homotopic += mi_term(row[z], pclass[h], pz[z]);
    return out;
}

DpiToy random_dpi_toy(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    DpiToy toy;
    const int steps = uniform_int(2, 3);
    toy.cells = uniform_int(2, 5) * uniform_int(2, 5);
    const int n_classes = uniform_int(2, 3);
    const int n_traj = uniform_int(n_classes, 8);

    std::set<std::vector<int>> seen;
    while (static_cast<int>(toy.trajectories.size()) < n_traj) {
        std::vector<int> y(static_cast<std::size_t>(steps));
        for (auto& c : y) c = uniform_int(0, toy.cells - 1);
        if (!seen.insert(y).second) continue;
        toy.trajectories.push_back(y);
        // first n_classes trajectories cover every class once
        const int idx = static_cast<int>(toy.classes.size());
        toy.classes.push_back(idx < n_classes ? idx : uniform_int(0, n_classes - 1));
        toy.probabilities.push_back(unit(rng) + 0.05);
    }
    double total = 0.0;
    for (double p : toy.probabilities) total += p;
    for (double& p : toy.probabilities) p /= total;

    for (int t = 0; t < steps; ++t) {
        if (unit(rng) < 0.6 || (t == steps - 1 && toy.observed_timesteps.empty())) toy.observed_timesteps.push_back(t);
    }
    for (std::size_t k = 0; k < toy.observed_timesteps.size(); ++k) {
        const int outcomes = uniform_int(2, 4);
        Eigen::MatrixXd ch(toy.cells, outcomes);
        for (int i = 0; i < toy.cells; ++i) {
            for (int j = 0; j < outcomes; ++j) ch(i, j) = unit(rng);
            ch.row(i) /= ch.row(i).sum();
        }
        toy.channels.push_back(std::move(ch));
    }
    return toy;
}

} // namespace homotrack
