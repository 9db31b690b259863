#include "homotrack/benchmark.hpp"

#include "homotrack/environment_io.hpp"
#include "homotrack/errors.hpp"
#include "homotrack/hash.hpp"
#include "homotrack/metrics.hpp"
#include "homotrack/model_io.hpp"
#include "homotrack/scenarios.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace homotrack {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& section, const char* key, T& target) {
    if (section.contains(key)) target = section.at(key).get<T>();
}

} // namespace

BenchmarkConfig BenchmarkConfig::from_json(const json& j) {
    BenchmarkConfig c;
    try {
        if (j.contains("environment")) {
            const auto& e = j.at("environment");
            if (e.contains("file")) c.environment_file = e.at("file").get<std::string>();
        }
        if (j.contains("dataset")) {
            const auto& d = j.at("dataset");
            read_opt(d, "preset", c.dataset.preset);
            if (d.contains("train_csv")) c.dataset.train_csv = d.at("train_csv").get<std::string>();
            if (d.contains("test_csv")) c.dataset.test_csv = d.at("test_csv").get<std::string>();
            read_opt(d, "horizon", c.dataset.horizon);
            read_opt(d, "train_per_class", c.dataset.train_per_class);
            read_opt(d, "test_per_class", c.dataset.test_per_class);
            read_opt(d, "gp_amplitude", c.dataset.gp.amplitude);
            read_opt(d, "gp_length_scale", c.dataset.gp.length_scale);
            read_opt(d, "gp_max_rejections", c.dataset.gp.max_rejections);
            read_opt(d, "seed", c.dataset.seed);
        }
        if (j.contains("sensor")) {
            const auto& s = j.at("sensor");
            read_opt(s, "peak", c.tracking.sensor.peak);
            read_opt(s, "radius", c.tracking.sensor.radius);
            read_opt(s, "noise_sd", c.tracking.sensor.noise_sd);
        }
        if (j.contains("planner")) {
            const auto& p = j.at("planner");
            auto& pc = c.tracking.planner;
            if (p.contains("grid")) pc.grid_nx = pc.grid_ny = p.at("grid").get<int>();
            read_opt(p, "grid_nx", pc.grid_nx);
            read_opt(p, "grid_ny", pc.grid_ny);
            read_opt(p, "threshold", pc.threshold);
            if (p.contains("threshold_mode")) {
                const auto mode = p.at("threshold_mode").get<std::string>();
                if (mode == "relative") pc.threshold_mode = ThresholdMode::relative;
                else if (mode == "absolute") pc.threshold_mode = ThresholdMode::absolute;
                else throw ConfigError("threshold_mode must be relative or absolute");
            }
            read_opt(p, "min_gain", pc.min_gain);
            read_opt(p, "max_nodes", pc.max_nodes);
            read_opt(p, "kappa", pc.kappa);
            read_opt(p, "iterations", pc.iterations);
            read_opt(p, "robot_speed", pc.robot_speed);
            read_opt(p, "speed_factor", pc.speed_factor);
            read_opt(p, "step", pc.step);
            read_opt(p, "kappa_r", pc.kappa_r);
        }
        if (j.contains("vomp")) {
            read_opt(j.at("vomp"), "max_order", c.vomp.max_order);
            read_opt(j.at("vomp"), "alpha", c.vomp.alpha);
        }
        if (j.contains("gmm")) {
            read_opt(j.at("gmm"), "components_per_class", c.gmm.components_per_class);
            read_opt(j.at("gmm"), "jitter", c.gmm.jitter);
            read_opt(j.at("gmm"), "seed", c.gmm.seed);
        }
        if (j.contains("run")) {
            const auto& r = j.at("run");
            read_opt(r, "seed", c.run.seed);
            c.tracking.seed = c.run.seed;
            if (r.contains("gain_kinds")) {
                c.run.gain_kinds.clear();
                for (const auto& k : r.at("gain_kinds")) c.run.gain_kinds.push_back(parse_gain_kind(k.get<std::string>()));
            }
            read_opt(r, "include_empty_class", c.run.include_empty_class);
            read_opt(r, "curve_measurements", c.run.curve_measurements);
            read_opt(r, "max_test_per_class", c.run.max_test_per_class);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed benchmark config: ") + e.what());
    }
    return c;
}

json BenchmarkConfig::to_json() const {
    json j;
    j["environment"] = environment_file ? json{{"file", environment_file->string()}} : json{{"preset", dataset.preset}};
    json d{{"preset", dataset.preset},
           {"horizon", dataset.horizon},
           {"train_per_class", dataset.train_per_class},
           {"test_per_class", dataset.test_per_class},
           {"gp_amplitude", dataset.gp.amplitude},
           {"gp_length_scale", dataset.gp.length_scale},
           {"gp_max_rejections", dataset.gp.max_rejections},
           {"seed", dataset.seed}};
    if (dataset.train_csv) d["train_csv"] = dataset.train_csv->string();
    if (dataset.test_csv) d["test_csv"] = dataset.test_csv->string();
    j["dataset"] = d;
    const auto& s = tracking.sensor;
    j["sensor"] = {{"peak", s.peak}, {"radius", s.radius}, {"noise_sd", s.noise_sd}};
    const auto& p = tracking.planner;
    j["planner"] = {{"grid_nx", p.grid_nx},
                    {"grid_ny", p.grid_ny},
                    {"threshold", p.threshold},
                    {"threshold_mode", p.threshold_mode == ThresholdMode::relative ? "relative" : "absolute"},
                    {"min_gain", p.min_gain},
                    {"max_nodes", p.max_nodes},
                    {"kappa", p.kappa},
                    {"iterations", p.iterations},
                    {"robot_speed", p.robot_speed},
                    {"speed_factor", p.speed_factor},
                    {"step", p.step},
                    {"kappa_r", p.kappa_r}};
    j["vomp"] = {{"max_order", vomp.max_order}, {"alpha", vomp.alpha}};
    j["gmm"] = {{"components_per_class", gmm.components_per_class}, {"jitter", gmm.jitter}, {"seed", gmm.seed}};
    json kinds = json::array();
    for (auto k : run.gain_kinds) kinds.push_back(homotrack::to_string(k));
    j["run"] = {{"seed", run.seed},
                {"gain_kinds", kinds},
                {"include_empty_class", run.include_empty_class},
                {"curve_measurements", run.curve_measurements},
                {"max_test_per_class", run.max_test_per_class}};
    return j;
}

PreparedBenchmark prepare_benchmark(const BenchmarkConfig& config) {
    PreparedBenchmark out;
    auto& model = out.model;
    model.env = config.environment_file ? load_environment(*config.environment_file) : three_obstacle_environment();
    model.rays = build_rays(model.env);

    const bool keep_empty = config.run.include_empty_class;
    auto keep = [keep_empty](const HWord& h) { return keep_empty || !h.empty(); };

    if (config.dataset.train_csv && config.dataset.test_csv) {
        CsvOptions opts{model.env.bounds, true};
        auto load = [&](const std::filesystem::path& p) {
            Dataset raw = load_csv(p, opts);
            for (auto& t : raw.trajectories) t = canonicalize(t, config.dataset.horizon);
            return filter_classes(cluster_by_signature(std::move(raw), model.rays), keep);
        };
        out.train = load(*config.dataset.train_csv);
        out.test = load(*config.dataset.test_csv);
    } else {
        if (config.dataset.preset != "three_obstacle") {
            throw ConfigError("unknown dataset preset '" + config.dataset.preset + "'");
        }
        const auto templates = three_obstacle_templates(keep_empty, config.dataset.horizon);
        const int per = config.dataset.train_per_class + config.dataset.test_per_class;
        Dataset all = synthesize_dataset(model.env, model.rays, templates, per, config.dataset.gp, config.dataset.seed);
        all = filter_classes(all, keep);
        std::tie(out.train, out.test) =
            split(all, config.dataset.train_per_class, config.dataset.test_per_class, config.dataset.seed);
    }

    model.prior = fit_gmm(out.train, config.gmm);
    model.vomp = VompModel::fit(out.train.signatures, config.vomp);
    model.target_speed = mean_speed(out.train);
    return out;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

KindSummary BenchmarkReport::summary(GainKind kind) const {
    KindSummary s;
    std::vector<double> counts;
    std::vector<double> ades;
    double occupancy = 0.0;
    int successes = 0;
    for (const auto& r : rows) {
        if (r.kind != kind) continue;
        ++s.runs;
        s.total_runtime_s += r.runtime_s;
        if (!r.error.empty()) continue;
        counts.push_back(r.measurements);
        ades.push_back(r.ade);
        occupancy += r.first_cube_occupancy;
        successes += r.success ? 1 : 0;
    }
    if (s.runs == 0) return s;
    s.median_measurements = quantile(counts, 0.5);
    s.q1_measurements = quantile(counts, 0.25);
    s.q3_measurements = quantile(counts, 0.75);
    s.median_ade = quantile(ades, 0.5);
    s.success_rate = static_cast<double>(successes) / s.runs;
    s.mean_cube_occupancy = counts.empty() ? 0.0 : occupancy / static_cast<double>(counts.size());

    if (auto it = visitation.find(kind); it != visitation.end()) {
        std::vector<int> v = it->second;
        const double total = std::accumulate(v.begin(), v.end(), 0.0);
        std::sort(v.rbegin(), v.rend());
        double top = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(5, v.size()); ++i) top += v[i];
        s.visitation_top5 = total > 0.0 ? top / total : 0.0;
    }
    return s;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    return run_benchmark(config, prepare_benchmark(config));
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config, const PreparedBenchmark& prepared) {
    const TrackingModel& model = prepared.model;
    BenchmarkReport report;
    report.grid = GridSpec::uniform(model.env, config.tracking.planner.grid_nx, config.tracking.planner.grid_ny);

    // test trajectories, optionally capped per class
    std::vector<std::size_t> chosen;
    std::map<HWord, int> taken;
    for (std::size_t i = 0; i < prepared.test.size(); ++i) {
        int& n = taken[prepared.test.signatures[i]];
        if (config.run.max_test_per_class > 0 && n >= config.run.max_test_per_class) continue;
        ++n;
        chosen.push_back(i);
    }
    std::vector<HomotopicGmm> truths;
    truths.reserve(chosen.size());
    for (std::size_t i : chosen) {
        truths.push_back(ground_truth_gmm(model.prior, prepared.test.trajectories[i], config.tracking.sensor.noise_sd));
    }

    for (GainKind kind : config.run.gain_kinds) {
        auto& visits = report.visitation[kind];
        visits.assign(static_cast<std::size_t>(report.grid.size()), 0);
        auto& curves = report.curves[kind];
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            const Trajectory& target = prepared.test.trajectories[chosen[k]];
            const HomotopicGmm& gt = truths[k];
            RunRow row;
            row.target = target.id;
            row.target_class = prepared.test.signatures[chosen[k]].str();
            row.kind = kind;

            TrackingConfig tc = config.tracking;
            tc.seed = config.run.seed * 7919ull + chosen[k];
            auto observer = [&](int index, const Posterior& post) {
                if (index >= config.run.curve_measurements) return;
                auto& kld = curves["kld"];
                auto& dvar = curves["dvar"];
                if (kld.size() <= static_cast<std::size_t>(index)) {
                    kld.resize(static_cast<std::size_t>(index) + 1);
                    dvar.resize(static_cast<std::size_t>(index) + 1);
                }
                kld[static_cast<std::size_t>(index)].push_back(weight_kld(gt, post.gmm));
                dvar[static_cast<std::size_t>(index)].push_back(variational_mi(gt, post.gmm));
            };
            try {
                const ExperimentTrace trace = replan_loop(model, target, kind, tc, observer);
                row.measurements = trace.measurement_count();
                const auto de = displacement_error(trace.final.gmm, target);
                row.ade = average_displacement_error(de);
                row.success = success(trace);
                row.runtime_s = trace.runtime_s;
                row.final_kld = weight_kld(gt, trace.final.gmm);
                row.final_dvar = variational_mi(gt, trace.final.gmm);
                row.first_cube_occupancy = trace.first_cube_occupancy;
                row.fallback_steps = trace.fallback_steps();
                auto& de_curve = curves["de"];
                if (de_curve.size() < de.size()) de_curve.resize(de.size());
                for (std::size_t t = 0; t < de.size(); ++t) de_curve[t].push_back(de[t]);
                for (const auto& s : trace.steps) {
                    if (s.attempted && s.t > 0) ++visits[static_cast<std::size_t>(report.grid.cell_of(s.robot))];
                }
            } catch (const Error& e) {
                row.error = e.what();
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

void write_report(const BenchmarkReport& report, const BenchmarkConfig& config, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "metrics.csv");
        out << "target,class,gain,measurements,ade,success,runtime_s,final_kld,final_dvar,cube_occupancy,fallback_steps,"
               "error\n";
        out.precision(10);
        for (const auto& r : report.rows) {
            out << r.target << ',' << '"' << r.target_class << '"' << ',' << to_string(r.kind) << ',' << r.measurements
                << ',' << r.ade << ',' << (r.success ? 1 : 0) << ',' << r.runtime_s << ',' << r.final_kld << ','
                << r.final_dvar << ',' << r.first_cube_occupancy << ',' << r.fallback_steps << ',' << '"' << r.error
                << '"' << '\n';
        }
    }
    {
        std::ofstream out(dir / "visitation.csv");
        out << "gain,x,y,count\n";
        for (const auto& [kind, counts] : report.visitation) {
            for (int c = 0; c < report.grid.size(); ++c) {
                const Point p = report.grid.location(c);
                out << to_string(kind) << ',' << p.x() << ',' << p.y() << ',' << counts[static_cast<std::size_t>(c)]
                    << '\n';
            }
        }
    }
    {
        std::ofstream out(dir / "curves.csv");
        out << "gain,series,index,n,median,q1,q3\n";
        out.precision(10);
        for (const auto& [kind, series] : report.curves) {
            for (const auto& [name, values] : series) {
                for (std::size_t i = 0; i < values.size(); ++i) {
                    out << to_string(kind) << ',' << name << ',' << i << ',' << values[i].size() << ','
                        << quantile(values[i], 0.5) << ',' << quantile(values[i], 0.25) << ','
                        << quantile(values[i], 0.75) << '\n';
                }
            }
        }
    }
    json manifest;
    const json cfg = config.to_json();
    manifest["config"] = cfg;
    manifest["config_hash"] = fnv1a(cfg.dump());
    manifest["outputs"] = {"metrics.csv", "visitation.csv", "curves.csv"};
    json summaries;
    for (const auto& [kind, counts] : report.visitation) {
        const KindSummary s = report.summary(kind);
        summaries[to_string(kind)] = {{"runs", s.runs},
                                      {"median_measurements", s.median_measurements},
                                      {"iqr_measurements", {s.q1_measurements, s.q3_measurements}},
                                      {"median_ade", s.median_ade},
                                      {"success_rate", s.success_rate},
                                      {"total_runtime_s", s.total_runtime_s},
                                      {"visitation_top5", s.visitation_top5},
                                      {"mean_cube_occupancy", s.mean_cube_occupancy}};
    }
    manifest["summary"] = summaries;
    write_json(manifest, dir / "manifest.json");
}

} // namespace homotrack
