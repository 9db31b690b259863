#pragma once

#include "homotrack/geometry.hpp"
#include "homotrack/info_gain.hpp"
#include "homotrack/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace homotrack {

/// Sensing locations at the cell centres of a uniform lattice. Cells whose
/// centre lies inside an obstacle are blocked and always score 0.
struct GridSpec {
    Bounds bounds;
    int nx = 30;
    int ny = 30;
    std::vector<char> blocked;

    static GridSpec uniform(const Environment& env, int nx, int ny);

    int size() const { return nx * ny; }
    int index(int ix, int iy) const { return iy * nx + ix; }
    Point location(int cell) const;
    /// Lattice cell containing p (clamped to the grid).
    int cell_of(const Point& p) const;
};

/// Gain values over grid cells and timesteps [t_begin, t_end).
struct Heatcube {
    GridSpec grid;
    int t_begin = 0;
    int t_end = 0;
    std::vector<double> values; // [(t - t_begin) * cells + cell]

    int steps() const { return t_end - t_begin; }
    double at(int cell, int t) const {
        return values[static_cast<std::size_t>((t - t_begin) * grid.size() + cell)];
    }
    double& at(int cell, int t) { return values[static_cast<std::size_t>((t - t_begin) * grid.size() + cell)]; }
    double max() const;
    /// Fraction of cells with value > frac * max (0 for an all-zero cube).
    double occupancy(double frac) const;
};

Heatcube build_heatcube(const GainField& field, const GridSpec& grid, int t_begin, int t_end);

enum class ThresholdMode { relative, absolute };

struct OptwNode {
    int id = 0;
    Point location = Point::Zero();
    int t_open = 0;
    int t_close = 0;
    double reward = 0.0;
};

struct OptwInstance {
    std::vector<OptwNode> nodes;
    Point start = Point::Zero();
    int start_time = 0;
    double speed = 1.0; ///< m/s
    double step = 1.0;  ///< s per timestep

    /// Arrival timestep when leaving `from` at `departure` for node `to`, or
    /// -1 if the window is missed.
    int arrival(const Point& from, int departure, const OptwNode& to) const;
};

/// Thresholds the cube and groups surviving cells by 6-connectivity. Within a
/// group, cells are taken by summed gain and become nodes whose windows span
/// the cell's member timesteps; a cell whose window overlaps one already
/// taken is dropped. Only the `max_nodes` cells with the most summed gain are
/// kept (0 keeps all). Ids follow opening time. Throws EmptyInstance when
/// nothing survives.
std::vector<OptwNode> extract_optw(const Heatcube& cube, double threshold,
                                   ThresholdMode mode = ThresholdMode::relative, int max_nodes = 0);

struct NodeExtraction {
    std::vector<OptwNode> nodes; ///< empty when the cube is negligible
    bool fallback = false;      ///< halved threshold or single argmax cell used
};

/// extract_optw, then the halved threshold, then the global argmax cell.
/// Returns no nodes when the cube max does not exceed `min_gain`.
NodeExtraction extract_nodes(const Heatcube& cube, double threshold, ThresholdMode mode, double min_gain,
                             int max_nodes = 0);

struct MctsConfig {
    int iterations = 2000;
    double kappa = 1.0;
    std::uint64_t seed = 0;
};

struct MctsResult {
    int first = -1;              ///< node id of the next sensing location
    int first_arrival = -1;
    std::vector<int> plan;       ///< best complete visit order found through `first`
    double plan_reward = 0.0;
    double mean_reward = 0.0;    ///< R/N of the chosen root child
};

/// UCT search over visit orders. Throws NoFeasibleAction if no node can be
/// reached from the start.
MctsResult mcts_plan(const OptwInstance& inst, const MctsConfig& config);

struct OptwSolution {
    double reward = 0.0;
    std::vector<int> order;
};

/// Depth-first enumeration of every feasible visit order (at most 8 nodes).
OptwSolution exhaustive_optw(const OptwInstance& inst);

/// Total reward of a visit order, or -1 if it breaks a time window.
double plan_value(const OptwInstance& inst, const std::vector<int>& order);

void export_heatcube_csv(const Heatcube& cube, const std::filesystem::path& path);
nlohmann::json optw_to_json(const OptwInstance& inst);

} // namespace homotrack
