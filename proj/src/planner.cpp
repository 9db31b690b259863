#include "homotrack/planner.hpp"

#include "homotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>

namespace homotrack {

GridSpec GridSpec::uniform(const Environment& env, int nx, int ny) {
    if (nx < 1 || ny < 1) throw ConfigError("grid needs at least one cell per axis");
    GridSpec g;
    g.bounds = env.bounds;
    g.nx = nx;
    g.ny = ny;
    g.blocked.assign(static_cast<std::size_t>(nx * ny), 0);
    for (int c = 0; c < g.size(); ++c) {
        const Point p = g.location(c);
        for (const auto& ob : env.obstacles) {
            if (ob.shape.contains(p)) g.blocked[static_cast<std::size_t>(c)] = 1;
        }
    }
    return g;
}

Point GridSpec::location(int cell) const {
    const int ix = cell % nx;
    const int iy = cell / nx;
    return {bounds.xmin + (ix + 0.5) * bounds.width() / nx, bounds.ymin + (iy + 0.5) * bounds.height() / ny};
}

int GridSpec::cell_of(const Point& p) const {
    const int ix = std::clamp(static_cast<int>((p.x() - bounds.xmin) / bounds.width() * nx), 0, nx - 1);
    const int iy = std::clamp(static_cast<int>((p.y() - bounds.ymin) / bounds.height() * ny), 0, ny - 1);
    return index(ix, iy);
}

double Heatcube::max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

double Heatcube::occupancy(double frac) const {
    const double m = max();
    if (m <= 0.0 || values.empty()) return 0.0;
    std::size_t n = 0;
    for (double v : values) {
        if (v > frac * m) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(values.size());
}

Heatcube build_heatcube(const GainField& field, const GridSpec& grid, int t_begin, int t_end) {
    Heatcube cube;
    cube.grid = grid;
    cube.t_begin = t_begin;
    cube.t_end = std::max(t_end, t_begin);
    cube.values.assign(static_cast<std::size_t>(cube.steps() * grid.size()), 0.0);
    std::vector<Point> locations(static_cast<std::size_t>(grid.size()));
    for (int c = 0; c < grid.size(); ++c) locations[static_cast<std::size_t>(c)] = grid.location(c);

    for (int t = t_begin; t < cube.t_end; ++t) {
        if (!field.slice_active(t)) continue;
        for (int c = 0; c < grid.size(); ++c) {
            if (grid.blocked[static_cast<std::size_t>(c)]) continue;
            const double v = field(locations[static_cast<std::size_t>(c)], t);
            cube.at(c, t) = std::isfinite(v) ? std::max(v, 0.0) : 0.0;
        }
    }
    return cube;
}

int OptwInstance::arrival(const Point& from, int departure, const OptwNode& to) const {
    const double dist = (to.location - from).norm();
    const int travel = static_cast<int>(std::ceil(dist / (speed * step) - 1e-9));
    const int t = std::max(to.t_open, departure + std::max(travel, 0));
    return t <= to.t_close ? t : -1;
}

std::vector<OptwNode> extract_optw(const Heatcube& cube, double threshold, ThresholdMode mode, int max_nodes) {
    const double cut = mode == ThresholdMode::relative ? threshold * cube.max() : threshold;
    const int cells = cube.grid.size();
    const int nx = cube.grid.nx;
    const int ny = cube.grid.ny;
    const auto total = static_cast<int>(cube.values.size());
    std::vector<char> seen(cube.values.size(), 0);
    auto keep = [&](int idx) { return cube.values[static_cast<std::size_t>(idx)] >= cut && cube.values[static_cast<std::size_t>(idx)] > 0.0; };

    std::vector<OptwNode> nodes;
    std::vector<double> mass;
    for (int start = 0; start < total; ++start) {
        if (seen[static_cast<std::size_t>(start)] || !keep(start)) continue;
        std::queue<int> open;
        open.push(start);
        seen[static_cast<std::size_t>(start)] = 1;
        std::map<int, std::vector<int>> columns; // cell -> member timesteps
        std::map<int, double> column_mass;
        while (!open.empty()) {
            const int idx = open.front();
            open.pop();
            const int ti = idx / cells;
            const int c = idx % cells;
            columns[c].push_back(ti + cube.t_begin);
            column_mass[c] += cube.values[static_cast<std::size_t>(idx)];

            const int ix = c % nx;
            const int iy = c / nx;
            int nbr[6];
            int n = 0;
            if (ix > 0) nbr[n++] = idx - 1;
            if (ix + 1 < nx) nbr[n++] = idx + 1;
            if (iy > 0) nbr[n++] = idx - nx;
            if (iy + 1 < ny) nbr[n++] = idx + nx;
            if (ti > 0) nbr[n++] = idx - cells;
            if (ti + 1 < cube.steps()) nbr[n++] = idx + cells;
            for (int k = 0; k < n; ++k) {
                if (!seen[static_cast<std::size_t>(nbr[k])] && keep(nbr[k])) {
                    seen[static_cast<std::size_t>(nbr[k])] = 1;
                    open.push(nbr[k]);
                }
            }
        }
        // heaviest cells first, one per stretch of time
        std::vector<int> order;
        for (const auto& kv : columns) order.push_back(kv.first);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return column_mass[a] > column_mass[b]; });
        std::vector<std::pair<int, int>> taken;
        for (int c : order) {
            const auto& times = columns[c];
            const int lo = *std::min_element(times.begin(), times.end());
            const int hi = *std::max_element(times.begin(), times.end());
            const bool overlaps = std::any_of(taken.begin(), taken.end(),
                                              [&](const auto& w) { return lo <= w.second && w.first <= hi; });
            if (overlaps) continue;
            taken.emplace_back(lo, hi);
            OptwNode node;
            node.location = cube.grid.location(c);
            node.t_open = lo;
            node.t_close = hi;
            node.reward = column_mass[c] / static_cast<double>(times.size());
            nodes.push_back(node);
            mass.push_back(column_mass[c]);
        }
    }
    if (nodes.empty()) throw EmptyInstance("no heatcube cell survives the threshold");
    if (max_nodes > 0 && nodes.size() > static_cast<std::size_t>(max_nodes)) {
        std::vector<std::size_t> order(nodes.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
        std::vector<OptwNode> kept;
        for (int k = 0; k < max_nodes; ++k) kept.push_back(nodes[order[static_cast<std::size_t>(k)]]);
        nodes = std::move(kept);
    }
    std::stable_sort(nodes.begin(), nodes.end(), [](const OptwNode& a, const OptwNode& b) {
        return a.t_open < b.t_open;
    });
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = static_cast<int>(i);
    return nodes;
}

NodeExtraction extract_nodes(const Heatcube& cube, double threshold, ThresholdMode mode, double min_gain,
                             int max_nodes) {
    NodeExtraction out;
    const double m = cube.max();
    if (m <= min_gain) return out;
    try {
        out.nodes = extract_optw(cube, threshold, mode, max_nodes);
        return out;
    } catch (const EmptyInstance&) {
    }
    out.fallback = true;
    try {
        out.nodes = extract_optw(cube, threshold / 2.0, mode, max_nodes);
        return out;
    } catch (const EmptyInstance&) {
    }
    const auto it = std::max_element(cube.values.begin(), cube.values.end());
    const int idx = static_cast<int>(it - cube.values.begin());
    OptwNode node;
    node.location = cube.grid.location(idx % cube.grid.size());
    node.t_open = node.t_close = idx / cube.grid.size() + cube.t_begin;
    node.reward = *it;
    out.nodes.push_back(node);
    return out;
}

namespace {

struct SearchNode {
    int node_id = -1; // -1 for the root
    int time = 0;
    int parent = -1;
    int depth = 0;
    double visits = 0.0;
    double reward = 0.0;
    std::vector<int> children;
    std::vector<int> untried; // feasible node ids, ascending
    std::size_t next_untried = 0;
};

struct PathState {
    Point position;
    int time = 0;
    std::vector<char> visited;
};

std::vector<int> feasible_children(const OptwInstance& inst, const PathState& s) {
    std::vector<int> out;
    for (const auto& n : inst.nodes) {
        if (!s.visited[static_cast<std::size_t>(n.id)] && inst.arrival(s.position, s.time, n) >= 0) out.push_back(n.id);
    }
    return out;
}

} // namespace

MctsResult mcts_plan(const OptwInstance& inst, const MctsConfig& config) {
    if (config.iterations < 1) throw ConfigError("MCTS needs at least one iteration");
    for (std::size_t i = 0; i < inst.nodes.size(); ++i) {
        if (inst.nodes[i].id != static_cast<int>(i)) throw Error("OPTW node ids must be 0..n-1 in order");
    }
    std::mt19937_64 rng(config.seed);
    const std::size_t n = inst.nodes.size();

    std::vector<SearchNode> tree;
    tree.reserve(static_cast<std::size_t>(config.iterations) + 1);
    SearchNode root;
    root.time = inst.start_time;
    {
        PathState s{inst.start, inst.start_time, std::vector<char>(n, 0)};
        root.untried = feasible_children(inst, s);
    }
    if (root.untried.empty()) throw NoFeasibleAction("no OPTW node is reachable from the robot state");
    tree.push_back(std::move(root));

    // returns are scored as a fraction of the total reward on offer
    double scale = 0.0;
    for (const auto& node : inst.nodes) scale += node.reward;
    if (scale <= 0.0) scale = 1.0;

    std::vector<double> best_value(n, -1.0);
    std::vector<std::vector<int>> best_order(n);
    std::vector<int> sequence;

    for (int iter = 0; iter < config.iterations; ++iter) {
        PathState state{inst.start, inst.start_time, std::vector<char>(n, 0)};
        sequence.clear();
        double total = 0.0;
        int cur = 0;

        // selection
        while (tree[static_cast<std::size_t>(cur)].next_untried == tree[static_cast<std::size_t>(cur)].untried.size() &&
               !tree[static_cast<std::size_t>(cur)].children.empty()) {
            const auto& parent = tree[static_cast<std::size_t>(cur)];
            const double log_n = std::log(parent.visits);
            int best = -1;
            double best_score = -std::numeric_limits<double>::infinity();
            for (int child : parent.children) {
                const auto& ch = tree[static_cast<std::size_t>(child)];
                const double score = ch.reward / ch.visits + config.kappa * std::sqrt(log_n / ch.visits);
                if (score > best_score) {
                    best_score = score;
                    best = child;
                }
            }
            cur = best;
            const auto& ch = tree[static_cast<std::size_t>(cur)];
            const auto& node = inst.nodes[static_cast<std::size_t>(ch.node_id)];
            state.position = node.location;
            state.time = ch.time;
            state.visited[static_cast<std::size_t>(ch.node_id)] = 1;
            sequence.push_back(ch.node_id);
            total += node.reward;
        }

        // expansion
        if (tree[static_cast<std::size_t>(cur)].next_untried < tree[static_cast<std::size_t>(cur)].untried.size()) {
            auto& parent = tree[static_cast<std::size_t>(cur)];
            const int id = parent.untried[parent.next_untried++];
            const auto& node = inst.nodes[static_cast<std::size_t>(id)];
            SearchNode child;
            child.node_id = id;
            child.time = inst.arrival(state.position, state.time, node);
            child.parent = cur;
            child.depth = parent.depth + 1;
            state.position = node.location;
            state.time = child.time;
            state.visited[static_cast<std::size_t>(id)] = 1;
            child.untried = feasible_children(inst, state);
            const int idx = static_cast<int>(tree.size());
            tree[static_cast<std::size_t>(cur)].children.push_back(idx);
            tree.push_back(std::move(child));
            cur = idx;
            sequence.push_back(id);
            total += node.reward;
        }

        // rollout
        for (;;) {
            const std::vector<int> options = feasible_children(inst, state);
            if (options.empty()) break;
            std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
            const int id = options[pick(rng)];
            const auto& node = inst.nodes[static_cast<std::size_t>(id)];
            state.time = inst.arrival(state.position, state.time, node);
            state.position = node.location;
            state.visited[static_cast<std::size_t>(id)] = 1;
            sequence.push_back(id);
            total += node.reward;
        }

        // backpropagation
        for (int k = cur; k >= 0; k = tree[static_cast<std::size_t>(k)].parent) {
            tree[static_cast<std::size_t>(k)].visits += 1.0;
            tree[static_cast<std::size_t>(k)].reward += total / scale;
        }
        const auto first = static_cast<std::size_t>(sequence.front());
        if (total > best_value[first]) {
            best_value[first] = total;
            best_order[first] = sequence;
        }
    }

    MctsResult out;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int child : tree.front().children) {
        const auto& ch = tree[static_cast<std::size_t>(child)];
        const double mean = ch.reward / ch.visits;
        if (mean > best_mean || (mean == best_mean && ch.node_id < out.first)) {
            best_mean = mean;
            out.first = ch.node_id;
            out.first_arrival = ch.time;
        }
    }
    out.mean_reward = best_mean * scale;
    out.plan = best_order[static_cast<std::size_t>(out.first)];
    out.plan_reward = best_value[static_cast<std::size_t>(out.first)];
    return out;
}

double plan_value(const OptwInstance& inst, const std::vector<int>& order) {
    Point pos = inst.start;
    int time = inst.start_time;
    double total = 0.0;
    std::vector<char> used(inst.nodes.size(), 0);
    for (int id : order) {
        const auto& node = inst.nodes.at(static_cast<std::size_t>(id));
        if (used[static_cast<std::size_t>(id)]) return -1.0;
        const int a = inst.arrival(pos, time, node);
        if (a < 0) return -1.0;
        used[static_cast<std::size_t>(id)] = 1;
        pos = node.location;
        time = a;
        total += node.reward;
    }
    return total;
}

namespace {

void dfs(const OptwInstance& inst, PathState& s, std::vector<int>& order, double value, OptwSolution& best) {
    if (value > best.reward) {
        best.reward = value;
        best.order = order;
    }
    for (const auto& node : inst.nodes) {
        if (s.visited[static_cast<std::size_t>(node.id)]) continue;
        const int a = inst.arrival(s.position, s.time, node);
        if (a < 0) continue;
        const PathState saved{s.position, s.time, {}};
        s.visited[static_cast<std::size_t>(node.id)] = 1;
        s.position = node.location;
        s.time = a;
        order.push_back(node.id);
        dfs(inst, s, order, value + node.reward, best);
        order.pop_back();
        s.position = saved.position;
        s.time = saved.time;
        s.visited[static_cast<std::size_t>(node.id)] = 0;
    }
}

} // namespace

OptwSolution exhaustive_optw(const OptwInstance& inst) {
    if (inst.nodes.size() > 8) throw InstanceTooLarge("exhaustive search is limited to 8 nodes");
    OptwSolution best;
    PathState s{inst.start, inst.start_time, std::vector<char>(inst.nodes.size(), 0)};
    std::vector<int> order;
    dfs(inst, s, order, 0.0, best);
    return best;
}

void export_heatcube_csv(const Heatcube& cube, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string());
    out << "x,y,t,gain\n";
    out.precision(10);
    for (int t = cube.t_begin; t < cube.t_end; ++t) {
        for (int c = 0; c < cube.grid.size(); ++c) {
            const Point p = cube.grid.location(c);
            out << p.x() << ',' << p.y() << ',' << t << ',' << cube.at(c, t) << '\n';
        }
    }
}

nlohmann::json optw_to_json(const OptwInstance& inst) {
    nlohmann::json j;
    j["start"] = {inst.start.x(), inst.start.y()};
    j["start_time"] = inst.start_time;
    j["speed"] = inst.speed;
    j["step"] = inst.step;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : inst.nodes) {
        j["nodes"].push_back({{"id", n.id},
                              {"location", {n.location.x(), n.location.y()}},
                              {"window", {n.t_open, n.t_close}},
                              {"reward", n.reward}});
    }
    return j;
}

} // namespace homotrack
