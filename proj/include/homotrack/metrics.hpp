#pragma once

#include "homotrack/homotopic_gmm.hpp"
#include "homotrack/tracking.hpp"
#include "homotrack/trajectory.hpp"

#include <vector>

namespace homotrack {

/// Prior conditioned on every position of the test trajectory with noise sd.
HomotopicGmm ground_truth_gmm(const HomotopicGmm& prior, const Trajectory& test, double noise_sd);

/// |y_t - mu_t| for the highest-weight component of `posterior`.
std::vector<double> displacement_error(const HomotopicGmm& posterior, const Trajectory& truth);
double average_displacement_error(const std::vector<double>& de);

/// sum w_gt (log w_gt - log w_obs) over aligned components; w_obs floored.
double weight_kld(const HomotopicGmm& gt, const HomotopicGmm& observed);

/// Variational upper-bound divergence between two mixtures.
double variational_mi(const HomotopicGmm& f, const HomotopicGmm& g);

/// At least one detection after t = 0.
bool success(const ExperimentTrace& trace);

} // namespace homotrack
