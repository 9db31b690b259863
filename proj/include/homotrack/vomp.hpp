#pragma once

#include "homotrack/topology.hpp"

#include <json.hpp>

#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace homotrack {

struct VompConfig {
    int max_order = 3;  ///< longest context length D
    double alpha = 1.0; ///< Laplace pseudo-count at each context
};

/// Discrete distribution over full h-signatures.
struct HomotopicBelief {
    std::vector<HWord> support;
    std::vector<double> probabilities;

    double prob(const HWord& h) const;
    bool is_point_mass(double tol = 0.0) const;
    double total() const;
};

/// Variable-order Markov model over signed letters. The terminal symbol is
/// letter 0. A context that reaches back to the start of the word is marked
/// with kStart, so with D at least the word length the model is exact.
/// Probabilities are restricted to words seen in training.
class VompModel {
public:
    static constexpr int kTerminal = 0;
    static constexpr int kStart = std::numeric_limits<int>::min();

    static VompModel fit(const std::vector<std::pair<HWord, double>>& corpus, const VompConfig& config = {});
    static VompModel fit(const std::vector<HWord>& words, const VompConfig& config = {});

    /// Chain-rule probability including the terminal symbol. Zero outside the
    /// training support.
    double sequence_prob(const HWord& w) const;

    /// Smoothed p(letter | history), the history truncated to its last D letters.
    double conditional(const std::vector<int>& history, int letter) const;

    const std::vector<std::pair<HWord, double>>& support() const { return support_; }
    const VompConfig& config() const { return config_; }
    const std::vector<int>& alphabet() const { return alphabet_; }

    nlohmann::json to_json() const;
    static VompModel from_json(const nlohmann::json& j);

private:
    VompConfig config_;
    std::vector<int> alphabet_;                               // sorted, includes kTerminal
    std::map<std::vector<int>, std::map<int, double>> counts_; // context -> next symbol -> count
    std::vector<std::pair<HWord, double>> support_;            // distinct words and multiplicities
};

/// p(h | partial) over compatible support words, proportional to sequence_prob.
/// Falls back to the whole support when nothing is compatible.
HomotopicBelief homotopic_belief(const VompModel& model, const HWord& partial);

/// Conditions a belief on the event "full word has prefix `partial`".
/// Returns an empty belief when that event has zero mass.
HomotopicBelief restrict_belief(const HomotopicBelief& belief, const HWord& partial);

} // namespace homotrack
