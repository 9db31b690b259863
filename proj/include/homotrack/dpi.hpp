#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace homotrack {

inline constexpr double kDpiStateBudget = 1e7;

/// Discretised two-or-three class tracking problem with an explicit channel.
/// Trajectories are sequences of cell indices, one per timestep, and each
/// carries a class label, so the class is a function of the trajectory.
struct DpiToy {
    int cells = 0;
    std::vector<std::vector<int>> trajectories;
    std::vector<double> probabilities;
    std::vector<int> classes;
    std::vector<int> observed_timesteps;
    /// One row-stochastic matrix per observed timestep: p(z_k | cell).
    std::vector<Eigen::MatrixXd> channels;
};

struct DpiResult {
    double i_metric = 0.0;    ///< I(Y; z), nats
    double i_homotopic = 0.0; ///< I(h; z), nats
};

/// Exact mutual informations by enumerating (trajectory, observation) pairs.
/// Throws ToyTooLarge beyond the state budget.
DpiResult dpi_check(const DpiToy& toy);

/// Random toy: 2-3 timesteps, at most 5x5 cells, 2-3 classes, distinct
/// trajectories, random channels with 2-4 outcomes.
DpiToy random_dpi_toy(std::uint64_t seed);

} // namespace homotrack
