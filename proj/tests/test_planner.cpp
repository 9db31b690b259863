#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "homotrack/errors.hpp"
#include "homotrack/planner.hpp"
#include "homotrack/scenarios.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace homotrack;

namespace {

class ConstantField : public GainField {
public:
    explicit ConstantField(double v) : v_(v) {}
    double operator()(const Point&, int) const override { return v_; }

private:
    double v_;
};

class XField : public GainField {
public:
    double operator()(const Point& x, int t) const override { return x.x() - 5.0 + t; }
};

Heatcube empty_cube(int nx, int ny, int t0, int t1) {
    Heatcube c;
    c.grid.bounds = {0, 0, double(nx), double(ny)};
    c.grid.nx = nx;
    c.grid.ny = ny;
    c.grid.blocked.assign(static_cast<std::size_t>(nx * ny), 0);
    c.t_begin = t0;
    c.t_end = t1;
    c.values.assign(static_cast<std::size_t>(nx * ny * (t1 - t0)), 0.0);
    return c;
}

// Square blob of side 2 at (ix, iy) over [ta, tb].
void blob(Heatcube& c, int ix, int iy, int ta, int tb, double v) {
    for (int t = ta; t <= tb; ++t)
        for (int dx = 0; dx < 2; ++dx)
            for (int dy = 0; dy < 2; ++dy) c.at(c.grid.index(ix + dx, iy + dy), t) = v + 0.01 * (dx + dy);
}

OptwNode node(int id, Point at, int open, int close, double reward) {
    OptwNode n;
    n.id = id;
    n.location = at;
    n.t_open = open;
    n.t_close = close;
    n.reward = reward;
    return n;
}

} // namespace

TEST_CASE("grid geometry") {
    const Environment env = three_obstacle_environment();
    const GridSpec g = GridSpec::uniform(env, 40, 20);
    CHECK(g.size() == 800);
    for (int c = 0; c < g.size(); ++c) CHECK(g.cell_of(g.location(c)) == c);
    // obstacle interior cells are blocked
    const int inside = g.cell_of(Point(10, 10));
    CHECK(g.blocked[static_cast<std::size_t>(inside)]);
    CHECK_FALSE(g.blocked[static_cast<std::size_t>(g.cell_of(Point(1, 1)))]);
    CHECK(g.cell_of(Point(-5, 100)) == g.index(0, 19));
}

TEST_CASE("heatcube construction") {
    const Environment env = three_obstacle_environment();
    const GridSpec g = GridSpec::uniform(env, 10, 5);
    SUBCASE("constant field") {
        const Heatcube c = build_heatcube(ConstantField(0.3), g, 2, 6);
        CHECK(c.steps() == 4);
        for (int t = 2; t < 6; ++t)
            for (int k = 0; k < g.size(); ++k)
                CHECK(c.at(k, t) == (g.blocked[static_cast<std::size_t>(k)] ? 0.0 : 0.3));
        CHECK(c.max() == 0.3);
    }
    SUBCASE("negative values are clamped") {
        const Heatcube c = build_heatcube(XField(), g, 0, 3);
        for (double v : c.values) CHECK(v >= 0.0);
        CHECK(c.at(g.cell_of(Point(2, 1)), 0) == 0.0);
    }
    SUBCASE("point mass belief gives an all-zero cube") {
        const auto rays = build_rays(env);
        const auto templates = three_obstacle_templates(false);
        const Dataset ds = synthesize_dataset(env, rays, templates, 6, {10, 0.3, 100}, 1);
        const HomotopicGmm gmm = fit_gmm(ds, {});
        HomotopicBelief pm;
        pm.support = {ds.signatures.front()};
        pm.probabilities = {1.0};
        const Heatcube c = build_heatcube(HomotopicGainField(gmm, pm, rays, SensorModel{}, 1), g, 1, gmm.horizon);
        CHECK(c.max() == 0.0);
        CHECK(c.occupancy(0.01) == 0.0);
    }
}

TEST_CASE("occupancy") {
    Heatcube c = empty_cube(4, 4, 0, 2);
    c.at(0, 0) = 1.0;
    c.at(1, 1) = 0.5;
    c.at(2, 1) = 0.005;
    CHECK(c.occupancy(0.01) == doctest::Approx(2.0 / 32));
}

TEST_CASE("optw extraction") {
    SUBCASE("single nonzero cell") {
        Heatcube c = empty_cube(5, 5, 3, 9);
        c.at(7, 5) = 2.0;
        const auto nodes = extract_optw(c, 0.7);
        REQUIRE(nodes.size() == 1);
        CHECK(nodes[0].t_open == 5);
        CHECK(nodes[0].t_close == 5);
        CHECK(nodes[0].reward == 2.0);
        CHECK(nodes[0].location.isApprox(c.grid.location(7)));
    }
    SUBCASE("three persistent blobs") {
        Heatcube c = empty_cube(20, 20, 0, 30);
        blob(c, 2, 2, 3, 12, 1.0);
        blob(c, 10, 14, 5, 25, 0.9);
        blob(c, 16, 3, 0, 29, 0.8);
        for (int t = 0; t < 30; ++t) c.at(c.grid.index(8, 8), t) = 0.3; // below threshold
        const auto nodes = extract_optw(c, 0.7);
        CHECK(nodes.size() == 3);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            CHECK(nodes[i].id == int(i));
            CHECK(nodes[i].reward > 0.0);
            CHECK(nodes[i].t_open <= nodes[i].t_close);
            if (i) CHECK(nodes[i - 1].t_open <= nodes[i].t_open);
        }
        CHECK(nodes[0].t_open == 0);
        CHECK(nodes[0].t_close == 29);
    }
    SUBCASE("bridged blobs form one node") {
        Heatcube c = empty_cube(20, 20, 0, 10);
        blob(c, 2, 2, 2, 6, 1.0);
        blob(c, 5, 2, 2, 6, 0.95);
        CHECK(extract_optw(c, 0.7).size() == 2);
        c.at(c.grid.index(4, 2), 4) = 0.9; // bridge
        CHECK(extract_optw(c, 0.7).size() == 1);
    }
    SUBCASE("one component visited at separate times yields separate nodes") {
        Heatcube c = empty_cube(10, 10, 0, 20);
        // a blob drifting right: early cells and late cells do not overlap in time
        for (int t = 0; t < 20; ++t) c.at(c.grid.index(t / 4, 5), t) = 1.0;
        const auto nodes = extract_optw(c, 0.5);
        CHECK(nodes.size() == 5);
        for (std::size_t i = 1; i < nodes.size(); ++i) CHECK(nodes[i].t_open > nodes[i - 1].t_close);
    }
    SUBCASE("node cap keeps the heaviest") {
        Heatcube c = empty_cube(20, 20, 0, 10);
        blob(c, 1, 1, 0, 9, 1.0);
        blob(c, 5, 5, 0, 9, 0.8);
        blob(c, 10, 10, 0, 1, 0.9);
        const auto nodes = extract_optw(c, 0.5, ThresholdMode::relative, 2);
        REQUIRE(nodes.size() == 2);
        for (const auto& n : nodes) CHECK(n.t_close == 9);
    }
    SUBCASE("absolute threshold") {
        Heatcube c = empty_cube(5, 5, 0, 4);
        c.at(3, 1) = 0.4;
        c.at(20, 2) = 0.2;
        CHECK(extract_optw(c, 0.3, ThresholdMode::absolute).size() == 1);
        CHECK(extract_optw(c, 0.1, ThresholdMode::absolute).size() == 2);
        CHECK_THROWS_AS(extract_optw(c, 0.5, ThresholdMode::absolute), EmptyInstance);
    }
    SUBCASE("all-zero cube") {
        const Heatcube c = empty_cube(4, 4, 0, 3);
        CHECK_THROWS_AS(extract_optw(c, 0.7), EmptyInstance);
        const NodeExtraction e = extract_nodes(c, 0.7, ThresholdMode::relative, 1e-6);
        CHECK(e.nodes.empty());
    }
    SUBCASE("fallbacks") {
        Heatcube c = empty_cube(4, 4, 0, 3);
        c.at(5, 1) = 0.4;
        const NodeExtraction ok = extract_nodes(c, 0.3, ThresholdMode::absolute, 1e-6);
        CHECK_FALSE(ok.fallback);
        CHECK(ok.nodes.empty() == false);
        const NodeExtraction halved = extract_nodes(c, 0.7, ThresholdMode::absolute, 1e-6);
        CHECK(halved.fallback);
        REQUIRE(halved.nodes.size() == 1);
        const NodeExtraction argmax = extract_nodes(c, 5.0, ThresholdMode::absolute, 1e-6);
        CHECK(argmax.fallback);
        REQUIRE(argmax.nodes.size() == 1);
        CHECK(argmax.nodes[0].t_open == 1);
        CHECK(argmax.nodes[0].location.isApprox(c.grid.location(5)));
    }
}

TEST_CASE("arrival times") {
    OptwInstance inst;
    inst.speed = 2.0;
    const OptwNode n = node(0, {10, 0}, 3, 7, 1.0);
    CHECK(inst.arrival({0, 0}, 0, n) == 5);
    CHECK(inst.arrival({9, 0}, 0, n) == 3); // waits for the window
    CHECK(inst.arrival({0, 0}, 3, n) == -1);
}

TEST_CASE("exhaustive search") {
    OptwInstance inst;
    CHECK(exhaustive_optw(inst).reward == 0.0);
    CHECK(exhaustive_optw(inst).order.empty());
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(exhaustive_optw(testsupport::random_optw(9, rng)), InstanceTooLarge);
    const OptwInstance r = testsupport::random_optw(5, rng);
    const OptwSolution s = exhaustive_optw(r);
    CHECK(plan_value(r, s.order) == doctest::Approx(s.reward));
}

TEST_CASE("plan value") {
    OptwInstance inst;
    inst.nodes = {node(0, {1, 0}, 0, 5, 1.0), node(1, {2, 0}, 0, 3, 2.0)};
    CHECK(plan_value(inst, {0}) == 1.0);
    CHECK(plan_value(inst, {1, 0}) == 3.0);
    CHECK(plan_value(inst, {0, 1}) == 3.0);
    inst.nodes[1].t_close = 1;
    CHECK(plan_value(inst, {0, 1}) == -1.0);
    CHECK(plan_value(inst, {0, 0}) == -1.0);
}

TEST_CASE("mcts") {
    MctsConfig cfg{3000, 1.0, 4};
    SUBCASE("single reachable node") {
        OptwInstance inst;
        inst.nodes = {node(0, {3, 4}, 0, 20, 0.5), node(1, {100, 0}, 0, 5, 9.0)};
        const MctsResult r = mcts_plan(inst, cfg);
        CHECK(r.first == 0);
        CHECK(r.first_arrival == 5);
        CHECK(r.plan == std::vector<int>{0});
    }
    SUBCASE("trap: the nearby node blocks a better one") {
        OptwInstance inst;
        inst.nodes = {node(0, {1, 0}, 1, 1, 1.0), node(1, {-9, 0}, 9, 9, 5.0)};
        CHECK(plan_value(inst, {0, 1}) == -1.0);
        const MctsResult r = mcts_plan(inst, cfg);
        CHECK(r.first == 1);
        CHECK(r.plan_reward == 5.0);
    }
    SUBCASE("zero reward instance still returns a feasible plan") {
        std::mt19937_64 rng(2);
        OptwInstance inst = testsupport::random_optw(4, rng);
        for (auto& n : inst.nodes) n.reward = 0.0;
        const MctsResult r = mcts_plan(inst, cfg);
        CHECK(plan_value(inst, r.plan) >= 0.0);
        CHECK(r.first == r.plan.front());
    }
    SUBCASE("nothing reachable") {
        OptwInstance inst;
        inst.nodes = {node(0, {100, 0}, 0, 2, 1.0)};
        CHECK_THROWS_AS(mcts_plan(inst, cfg), NoFeasibleAction);
    }
    SUBCASE("deterministic for a seed") {
        std::mt19937_64 rng(3);
        const OptwInstance inst = testsupport::random_optw(5, rng);
        const MctsResult a = mcts_plan(inst, cfg), b = mcts_plan(inst, cfg);
        CHECK(a.first == b.first);
        CHECK(a.plan == b.plan);
        CHECK(a.mean_reward == b.mean_reward);
    }
    SUBCASE("pure exploitation still yields feasible plans") {
        std::mt19937_64 rng(4);
        for (int i = 0; i < 20; ++i) {
            const OptwInstance inst = testsupport::random_optw(5, rng);
            const MctsResult r = mcts_plan(inst, {500, 0.0, 1});
            CHECK(plan_value(inst, r.plan) == doctest::Approx(r.plan_reward));
        }
    }
    SUBCASE("matches the exhaustive optimum on small instances") {
        std::mt19937_64 rng(5);
        int optimal = 0;
        for (int i = 0; i < 30; ++i) {
            const OptwInstance inst = testsupport::random_optw(1 + i % 5, rng);
            const MctsResult r = mcts_plan(inst, {5000, 1.0, std::uint64_t(i)});
            if (std::abs(r.plan_reward - exhaustive_optw(inst).reward) < 1e-9) ++optimal;
        }
        CHECK(optimal >= 28);
    }
    SUBCASE("ids must be positional") {
        OptwInstance inst;
        inst.nodes = {node(3, {1, 0}, 0, 5, 1.0)};
        CHECK_THROWS_AS(mcts_plan(inst, cfg), Error);
    }
}

TEST_CASE("exports") {
    Heatcube c = empty_cube(2, 2, 1, 3);
    c.at(3, 2) = 0.25;
    const auto path = std::filesystem::temp_directory_path() / "homotrack_cube.csv";
    export_heatcube_csv(c, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y,t,gain");
    int rows = 0;
    bool found = false;
    while (std::getline(in, line)) {
        ++rows;
        if (line == "1.5,1.5,2,0.25") found = true;
    }
    CHECK(rows == 8);
    CHECK(found);
    std::filesystem::remove(path);

    OptwInstance inst;
    inst.nodes = {node(0, {1, 2}, 3, 4, 0.5)};
    const auto j = optw_to_json(inst);
    CHECK(j["nodes"].size() == 1);
    CHECK(j["speed"].get<double>() == 1.0);
}
