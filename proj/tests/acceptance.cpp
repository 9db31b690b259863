// Acceptance run: prints one PASS/FAIL line per criterion, exits non-zero if any fails.
#include "homotrack/benchmark.hpp"
#include "homotrack/dpi.hpp"
#include "homotrack/gaussian.hpp"
#include "homotrack/homotopic_gmm.hpp"
#include "homotrack/info_gain.hpp"
#include "homotrack/planner.hpp"
#include "homotrack/scenarios.hpp"
#include "homotrack/topology.hpp"
#include "homotrack/vomp.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace homotrack;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome dpi() {
    const auto t0 = Clock::now();
    int ok = 0, oracle_ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DpiToy toy = random_dpi_toy(seed);
        const DpiResult r = dpi_check(toy);
        const DpiResult o = testsupport::dpi_entropy_oracle(toy);
        if (r.i_homotopic <= r.i_metric + 1e-9) ++ok;
        if (std::abs(r.i_metric - o.i_metric) < 1e-9 && std::abs(r.i_homotopic - o.i_homotopic) < 1e-9) ++oracle_ok;
    }
    const double s = seconds_since(t0);
    return {ok == 100 && oracle_ok == 100 && s < 60.0,
            fmt("%d/100 toys satisfy I(h;z) <= I(Y;z), %d/100 match the entropy oracle, %.2f s", ok, oracle_ok, s)};
}

Outcome conditioning() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    int ok = 0;
    double worst_mean = 0, worst_cov = 0;
    for (int i = 0; i < 200; ++i) {
        const int T = (i % 2) ? 5 : 3;
        const int k = 1 + i % 3;
        std::vector<int> ts(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) ts[static_cast<std::size_t>(t)] = t;
        std::shuffle(ts.begin(), ts.end(), rng);
        ts.resize(static_cast<std::size_t>(k));
        std::sort(ts.begin(), ts.end());
        Gaussian<double> g;
        g.mean = Eigen::VectorXd(2 * T);
        for (int j = 0; j < 2 * T; ++j) g.mean(j) = 3 * nd(rng);
        g.cov = testsupport::random_spd(2 * T, rng);
        std::vector<Eigen::Index> obs;
        for (int t : ts) {
            obs.push_back(2 * t);
            obs.push_back(2 * t + 1);
        }
        Eigen::VectorXd y(2 * k);
        for (int j = 0; j < 2 * k; ++j) y(j) = 3 * nd(rng);
        const double nv = std::uniform_real_distribution<double>(1e-4, 0.5)(rng);
        const auto res = condition_on_coordinates<double>(g, obs, y, nv);
        const auto ref = testsupport::partition_condition(g.mean, g.cov, obs, y, nv);
        const double dm = (res.posterior.mean - ref.mean).cwiseAbs().maxCoeff();
        const double dc = (res.posterior.cov - ref.cov).norm();
        worst_mean = std::max(worst_mean, dm);
        worst_cov = std::max(worst_cov, dc);
        if (dm <= 1e-8 && dc <= 1e-8) ++ok;
    }
    return {ok == 200, fmt("%d/200 cases, worst mean error %.2e, worst covariance error %.2e", ok, worst_mean, worst_cov)};
}

Outcome detection() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    int ok = 0;
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const int T = 4;
        const GmmComponent c = testsupport::random_component(T, rng, 0.3 + 1.5 * u(rng));
        const int t = i % T;
        const TimeMarginal m = marginal_at_time(c, t);
        const Point x = m.mean + Point(4 * u(rng) - 2, 4 * u(rng) - 2);
        const double r = 0.5 + 2.5 * u(rng);
        const double A = 0.5 + 0.5 * u(rng);
        const testsupport::MvnSampler draw(m.mean, m.cov);
        const int n = 1000000;
        double acc = 0;
        for (int k = 0; k < n; ++k) acc += A * std::exp(-(x - Point(draw(rng))).squaredNorm() / (2 * r * r));
        const double err = std::abs(detection_prob(c, x, t, r, A) - acc / n);
        worst = std::max(worst, err);
        if (err <= 1e-3) ++ok;
    }
    return {ok == 20, fmt("%d/20 setups within 1e-3 of 1e6-sample Monte Carlo, worst %.2e", ok, worst)};
}

Outcome crossing() {
    const Environment env = three_obstacle_environment();
    const auto rays = build_rays(env);
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0, 1);
    int ok = 0;
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const Ray& ray = rays[static_cast<std::size_t>(i) % rays.size()];
        const double ylo = std::min(ray.origin.y(), ray.endpoint.y()), yhi = std::max(ray.origin.y(), ray.endpoint.y());
        GmmComponent c = testsupport::random_component(3, rng, 0.2 + 0.6 * u(rng));
        const int t = i % 2;
        for (int k = 0; k < 3; ++k)
            c.mean.segment<2>(2 * k) = Point(ray.origin.x() + 3 * u(rng) - 1.5, ylo + (yhi - ylo) * u(rng));
        const testsupport::MvnSampler draw(c.mean.segment(2 * t, 4), c.cov.block(2 * t, 2 * t, 4, 4));
        const Ray one[1] = {ray};
        const int n = 100000;
        int hits = 0;
        for (int k = 0; k < n; ++k) {
            const Eigen::VectorXd s = draw(rng);
            if (!segment_crossings(s.head<2>(), s.tail<2>(), one).empty()) ++hits;
        }
        const double err = std::abs(crossing_prob(c, ray, t).total() - double(hits) / n);
        worst = std::max(worst, err);
        if (err <= 0.02) ++ok;
    }
    return {ok == 20, fmt("%d/20 setups within 0.02 of 1e5-draw Monte Carlo, worst %.4f", ok, worst)};
}

Outcome signatures() {
    const Environment env2 = testsupport::two_obstacle_env();
    const auto rays2 = build_rays(env2);
    const HWord raw = h_signature(testsupport::two_obstacle_gamma(), rays2);
    const bool example = raw == HWord({1, 2, -2}) && reduce(raw) == HWord({1});

    const Environment env = three_obstacle_environment();
    const auto rays = build_rays(env);
    std::mt19937_64 rng(5150);
    int agree = 0;
    for (int i = 0; i < 1000; ++i) {
        const Polyline p = testsupport::random_avoiding_polyline(env, 1 + i % 6, rng);
        const HWord r = reduce(h_signature(p, rays));
        const Polyline closed = quotient_closure(p, env.bounds, rays);
        bool all = true;
        for (std::size_t k = 0; k < env.obstacles.size(); ++k)
            all = all && winding_oracle(closed, env, k) == net_letter_count(r, static_cast<int>(k) + 1);
        if (all) ++agree;
    }
    return {example && agree == 1000,
            fmt("worked example %s (raw %s, reduced %s), winding agreement %d/1000", example ? "exact" : "wrong",
                raw.str().c_str(), reduce(raw).str().c_str(), agree)};
}

Outcome mcts() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(9001);
    std::uniform_int_distribution<int> size(1, 5);
    int optimal = 0;
    for (int i = 0; i < 100; ++i) {
        const OptwInstance inst = testsupport::random_optw(size(rng), rng);
        const MctsResult r = mcts_plan(inst, {5000, 1.0, std::uint64_t(i)});
        if (std::abs(r.plan_reward - exhaustive_optw(inst).reward) < 1e-9) ++optimal;
    }
    const double s = seconds_since(t0);
    return {optimal >= 95 && s < 120.0, fmt("%d/100 instances optimal, %.2f s", optimal, s)};
}

std::string describe(const char* name, const KindSummary& s) {
    return fmt("%s median measurements %.1f, median ADE %.3f m, success %.3f, runtime %.1f s", name,
               s.median_measurements, s.median_ade, s.success_rate, s.total_runtime_s);
}

struct BenchmarkPair {
    KindSummary homotopic, metric;
    double seconds = 0.0;
    int failed_runs = 0;
};

BenchmarkPair run_pair(const BenchmarkConfig& cfg) {
    const auto t0 = Clock::now();
    const BenchmarkReport r = run_benchmark(cfg);
    BenchmarkPair out{r.summary(GainKind::homotopic), r.summary(GainKind::metric), seconds_since(t0), 0};
    for (const auto& row : r.rows)
        if (!row.error.empty()) ++out.failed_runs;
    return out;
}

Outcome ordering(const BenchmarkPair& b) {
    const bool a = b.homotopic.median_measurements < b.metric.median_measurements;
    const bool ade = b.homotopic.median_ade <= 2.0 * b.metric.median_ade;
    const bool rt = b.homotopic.total_runtime_s < b.metric.total_runtime_s;
    const bool succ = b.homotopic.success_rate >= 0.95 && b.metric.success_rate >= 0.95;
    std::ostringstream d;
    d << "counts " << (a ? "ok" : "NO") << ", ADE ratio " << fmt("%.2f", b.homotopic.median_ade / b.metric.median_ade)
      << (ade ? " ok" : " NO") << ", runtime " << (rt ? "ok" : "NO") << ", success " << (succ ? "ok" : "NO") << "; "
      << describe("homotopic", b.homotopic) << "; " << describe("metric", b.metric)
      << fmt("; %d errored runs, wall %.0f s", b.failed_runs, b.seconds);
    return {a && ade && rt && succ && b.failed_runs == 0, d.str()};
}

Outcome sparsity(const BenchmarkPair& b) {
    const bool conc = b.homotopic.visitation_top5 > b.metric.visitation_top5;
    const bool occ = b.homotopic.mean_cube_occupancy < b.metric.mean_cube_occupancy;
    return {conc && occ, fmt("top-5 visitation mass %.3f vs %.3f, cube occupancy %.4f vs %.4f (homotopic vs metric)",
                             b.homotopic.visitation_top5, b.metric.visitation_top5, b.homotopic.mean_cube_occupancy,
                             b.metric.mean_cube_occupancy)};
}

Outcome ablation(const BenchmarkPair& base, const BenchmarkPair& with_empty) {
    // two binomial standard errors of the difference
    const double p = 0.5 * (base.homotopic.success_rate + with_empty.homotopic.success_rate);
    const double noise = std::max(2.0 * std::sqrt(p * (1 - p) * (1.0 / base.homotopic.runs + 1.0 / with_empty.homotopic.runs)),
                                  1.0 / with_empty.homotopic.runs);
    const bool succ = with_empty.homotopic.success_rate <= base.homotopic.success_rate + noise;
    const bool counts = with_empty.homotopic.median_measurements < with_empty.metric.median_measurements;
    return {succ && counts,
            fmt("homotopic success %.3f with the empty class vs %.3f without (noise %.3f); medians %.1f vs metric %.1f",
                with_empty.homotopic.success_rate, base.homotopic.success_rate, noise,
                with_empty.homotopic.median_measurements, with_empty.metric.median_measurements)};
}

// Property suites, 1000+ cases each.

HomotopicGmm random_gmm(int comps, int T, std::mt19937_64& rng) {
    HomotopicGmm g;
    g.horizon = T;
    double total = 0;
    for (int i = 0; i < comps; ++i) {
        GmmComponent c = testsupport::random_component(T, rng);
        c.label = {HWord({i + 1}), 1};
        c.weight = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
        total += c.weight;
        g.components.push_back(c);
    }
    for (auto& c : g.components) c.weight /= total;
    return g;
}

double weight_sum(const HomotopicGmm& g) {
    double s = 0;
    for (const auto& c : g.components) s += c.weight;
    return s;
}

HWord random_word(std::mt19937_64& rng, int max_len, int letters) {
    std::uniform_int_distribution<int> len(0, max_len), let(1, letters), sgn(0, 1);
    std::vector<int> w(static_cast<std::size_t>(len(rng)));
    for (int& l : w) l = sgn(rng) ? let(rng) : -let(rng);
    return HWord(w);
}

Outcome invariants() {
    std::mt19937_64 rng(31337);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(0, 1);
    int norm_cases = 0, norm_ok = 0, kl_cases = 0, kl_ok = 0, ref_cases = 0, ref_ok = 0, ord_cases = 0, ord_ok = 0;

    for (int i = 0; i < 1000; ++i) {
        const int T = 3 + i % 3;
        const HomotopicGmm g = random_gmm(1 + i % 4, T, rng);
        const double sd = 0.05 + 0.95 * u(rng);
        const Point z1(3 * nd(rng), 3 * nd(rng)), z2(3 * nd(rng), 3 * nd(rng));
        const int t1 = i % (T - 1), t2 = T - 1;
        const MeasurementSet a{{{t1, z1, z1}}, sd}, b{{{t2, z2, z2}}, sd}, ab{{{t1, z1, z1}, {t2, z2, z2}}, sd};
        const HomotopicGmm joint = condition(g, ab);
        const HomotopicGmm seq = condition(condition(g, a), b);
        bool same = true;
        for (std::size_t c = 0; c < g.size(); ++c) {
            same = same && (joint.components[c].mean - seq.components[c].mean).cwiseAbs().maxCoeff() < 1e-8;
            same = same && (joint.components[c].cov - seq.components[c].cov).norm() < 1e-8;
        }
        ++ord_cases;
        if (same) ++ord_ok;

        HomotopicBelief ub;
        for (const auto& c : g.components) {
            ub.support.push_back(c.label.signature);
            ub.probabilities.push_back(1.0 / double(g.size()));
        }
        const Point x(3 * nd(rng), 3 * nd(rng));
        const SensorModel s{0.95, 1.5, sd};
        for (const HomotopicGmm& h : {joint, update_miss(g, ub, x, t1, s), update_detect(g, ub, x, t1, z1, s),
                                      scale_by_belief(g, ub)}) {
            ++norm_cases;
            if (std::abs(weight_sum(h) - 1.0) <= 1e-12) ++norm_ok;
        }
    }

    for (int rep = 0; rep < 120; ++rep) {
        std::vector<HWord> corpus;
        for (int k = 0; k < 25; ++k) corpus.push_back(random_word(rng, 4, 2));
        const VompModel m = VompModel::fit(corpus, {3, 1.0});
        for (int q = 0; q < 20; ++q) {
            const HWord& base = corpus[std::uniform_int_distribution<std::size_t>(0, corpus.size() - 1)(rng)];
            const std::size_t k = std::uniform_int_distribution<std::size_t>(0, base.size())(rng);
            const HWord rho(std::vector<int>(base.letters.begin(), base.letters.begin() + long(k)));
            const HomotopicBelief b0 = homotopic_belief(m, rho);
            ++norm_cases;
            if (std::abs(b0.total() - 1.0) <= 1e-12) ++norm_ok;
            if (k < base.size()) {
                const HomotopicBelief b1 = homotopic_belief(m, rho.extended(base.letters[k]));
                const std::set<HWord> sup(b0.support.begin(), b0.support.end());
                bool subset = true;
                for (const auto& w : b1.support) subset = subset && sup.count(w) == 1;
                ++ref_cases;
                if (subset) ++ref_ok;
                ++kl_cases;
                if (homotopic_kl(b1, b0) >= 0.0) ++kl_ok;
            }
        }
    }

    while (kl_cases < 2000) {
        const int n = 1 + kl_cases % 6;
        HomotopicBelief p, q;
        double sp = 0, sq = 0;
        for (int k = 0; k < n; ++k) {
            p.support.push_back(HWord({k + 1}));
            q.support.push_back(HWord({k + 1}));
            p.probabilities.push_back(u(rng));
            q.probabilities.push_back(u(rng) < 0.2 ? 0.0 : u(rng));
            sp += p.probabilities.back();
            sq += q.probabilities.back();
        }
        if (sq == 0) continue;
        for (auto& v : p.probabilities) v /= sp;
        for (auto& v : q.probabilities) v /= sq;
        ++kl_cases;
        if (homotopic_kl(p, q) >= 0.0) ++kl_ok;
    }

    const bool pass = norm_ok == norm_cases && kl_ok == kl_cases && ref_ok == ref_cases && ord_ok == ord_cases &&
                      std::min({norm_cases, kl_cases, ref_cases, ord_cases}) >= 1000;
    return {pass, fmt("normalisation %d/%d, KL non-negative %d/%d, refinement %d/%d, order independence %d/%d", norm_ok,
                      norm_cases, kl_ok, kl_cases, ref_ok, ref_cases, ord_ok, ord_cases)};
}

} // namespace

int main(int argc, char** argv) {
    // --quick skips the benchmark criteria (7, 8, 10)
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    int failed = 0;
    auto report = [&](int n, const Outcome& o) {
        std::printf("criterion %d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    };
    auto guarded = [](const std::function<Outcome()>& f) -> Outcome {
        try {
            return f();
        } catch (const std::exception& e) {
            return {false, std::string("threw: ") + e.what()};
        }
    };

    report(1, guarded(dpi));
    report(2, guarded(conditioning));
    report(3, guarded(detection));
    report(4, guarded(crossing));
    report(5, guarded(signatures));
    report(6, guarded(mcts));

    if (quick) {
        std::printf("criteria 7, 8, 10 skipped (--quick)\n");
    } else {
        BenchmarkPair base, empty;
        std::string err;
        try {
            base = run_pair(BenchmarkConfig{});
        } catch (const std::exception& e) {
            err = e.what();
        }
        if (err.empty()) {
            report(7, ordering(base));
            report(8, sparsity(base));
        } else {
            report(7, {false, "benchmark threw: " + err});
            report(8, {false, "benchmark threw: " + err});
        }
        report(9, guarded(invariants));
        if (err.empty()) {
            report(10, guarded([&] {
                BenchmarkConfig cfg;
                cfg.run.include_empty_class = true;
                empty = run_pair(cfg);
                return ablation(base, empty);
            }));
        } else {
            report(10, {false, "benchmark threw: " + err});
        }
    }
    if (quick) report(9, guarded(invariants));
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
