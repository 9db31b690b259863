#include "homotrack/benchmark.hpp"
#include "homotrack/environment_io.hpp"
#include "homotrack/errors.hpp"
#include "homotrack/info_gain.hpp"
#include "homotrack/metrics.hpp"
#include "homotrack/model_io.hpp"
#include "homotrack/planner.hpp"
#include "homotrack/scenarios.hpp"
#include "homotrack/tracking.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace homotrack;

namespace {

// Sensor and planner settings come from an optional benchmark-style config.
TrackingConfig tracking_config(const std::string& path) {
    if (path.empty()) return {};
    return BenchmarkConfig::from_json(read_json(path)).tracking;
}

Trajectory pick_trajectory(const std::string& csv, const std::string& id, const Environment& env, int T) {
    Dataset ds = load_csv(csv, {env.bounds, false});
    if (ds.trajectories.empty()) throw Error(csv + " holds no trajectories");
    for (const auto& t : ds.trajectories) {
        if (id.empty() || t.id == id) return canonicalize(t, T);
    }
    throw Error("trajectory '" + id + "' not found in " + csv);
}

TrackingModel tracking_model(const Environment& env, const SavedModel& saved) {
    TrackingModel m;
    m.env = env;
    m.rays = build_rays(env);
    m.prior = saved.gmm;
    m.vomp = saved.vomp;
    m.target_speed = saved.target_speed;
    return m;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homotopy-aware active target tracking"};
    app.require_subcommand(1);

    // fit
    std::string env_path, train_csv, model_out;
    GmmFitConfig fit_cfg;
    VompConfig vomp_cfg;
    int horizon = kDefaultHorizon;
    bool keep_empty = true;
    auto* fit = app.add_subcommand("fit", "Train the homotopic GMM and VOMP from a trajectory CSV");
    fit->add_option("--env", env_path, "Environment JSON")->required();
    fit->add_option("--train", train_csv, "Training CSV (id,t,x,y)")->required();
    fit->add_option("--nc", fit_cfg.components_per_class, "Components per class")->capture_default_str();
    fit->add_option("--jitter", fit_cfg.jitter, "Covariance jitter (m^2)")->capture_default_str();
    fit->add_option("--seed", fit_cfg.seed, "k-means seed")->capture_default_str();
    fit->add_option("--order", vomp_cfg.max_order, "VOMP order D")->capture_default_str();
    fit->add_option("--alpha", vomp_cfg.alpha, "VOMP Laplace pseudo-count")->capture_default_str();
    fit->add_option("--horizon", horizon, "Timesteps per trajectory")->capture_default_str();
    fit->add_flag("!--drop-empty-class", keep_empty, "Discard trajectories that cross no ray");
    fit->add_option("--out", model_out, "Model JSON")->required();

    // track
    std::string model_path, traj_csv, traj_id, gain = "homotopic", out_path, config_path;
    std::uint64_t seed = 0;
    auto* track = app.add_subcommand("track", "Run one closed-loop tracking experiment");
    track->add_option("--env", env_path, "Environment JSON")->required();
    track->add_option("--model", model_path, "Model JSON from fit")->required();
    track->add_option("--traj", traj_csv, "CSV holding the target trajectory")->required();
    track->add_option("--id", traj_id, "Trajectory id (first in file by default)");
    track->add_option("--gain", gain, "homotopic or metric")->capture_default_str();
    track->add_option("--seed", seed, "Run seed")->capture_default_str();
    track->add_option("--config", config_path, "Config JSON for sensor/planner settings");
    track->add_option("--out", out_path, "Trace JSON")->required();

    // evaluate
    std::string out_dir;
    auto* evaluate = app.add_subcommand("evaluate", "Run the full benchmark");
    evaluate->add_option("--config", config_path, "Benchmark config JSON")->required();
    evaluate->add_option("--out", out_dir, "Output directory")->required();

    // heatcube
    int t0 = 1;
    std::vector<int> observed{0};
    auto* heat = app.add_subcommand("heatcube", "Export the expected-gain heatcube");
    heat->add_option("--env", env_path, "Environment JSON")->required();
    heat->add_option("--model", model_path, "Model JSON from fit")->required();
    heat->add_option("--traj", traj_csv, "CSV holding the target trajectory")->required();
    heat->add_option("--id", traj_id, "Trajectory id (first in file by default)");
    heat->add_option("--t", t0, "First timestep of the cube")->capture_default_str();
    heat->add_option("--observed", observed, "Timesteps measured before the cube")->delimiter(',');
    heat->add_option("--gain", gain, "homotopic or metric")->capture_default_str();
    heat->add_option("--config", config_path, "Config JSON for sensor/planner settings");
    std::string optw_out;
    heat->add_option("--optw", optw_out, "Also write the extracted OPTW instance (JSON)");
    heat->add_option("--out", out_path, "Heatcube CSV (x,y,t,gain)")->required();

    // synth
    std::string train_out, test_out, env_out;
    auto* synth = app.add_subcommand("synth", "Generate the three-obstacle synthetic dataset");
    synth->add_option("--config", config_path, "Benchmark config JSON (dataset section)");
    synth->add_option("--train-out", train_out, "Training CSV")->required();
    synth->add_option("--test-out", test_out, "Test CSV")->required();
    synth->add_option("--env-out", env_out, "Also write the environment JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) {
            const Environment env = load_environment(env_path);
            const auto rays = build_rays(env);
            Dataset raw = load_csv(train_csv, {env.bounds, true});
            for (auto& t : raw.trajectories) t = canonicalize(t, horizon);
            Dataset train = cluster_by_signature(std::move(raw), rays);
            if (!keep_empty) train = filter_classes(train, [](const HWord& h) { return !h.empty(); });
            SavedModel saved;
            saved.fit = fit_cfg;
            saved.gmm = fit_gmm(train, fit_cfg);
            saved.vomp = VompModel::fit(train.signatures, vomp_cfg);
            saved.target_speed = mean_speed(train);
            save_model(saved, model_out);
            std::cout << "fitted " << saved.gmm.size() << " components over " << class_map(train).size()
                      << " classes from " << train.size() << " trajectories\n";
        } else if (*track) {
            const Environment env = load_environment(env_path);
            const TrackingModel model = tracking_model(env, load_model(model_path));
            TrackingConfig cfg = tracking_config(config_path);
            cfg.seed = seed;
            const Trajectory target = pick_trajectory(traj_csv, traj_id, env, model.prior.horizon);
            const ExperimentTrace trace = replan_loop(model, target, parse_gain_kind(gain), cfg);
            nlohmann::json j = trace_to_json(trace);
            j["success"] = success(trace);
            j["ade"] = average_displacement_error(displacement_error(trace.final.gmm, target));
            write_json(j, out_path);
            std::cout << "measurements " << trace.measurement_count() << ", success " << (success(trace) ? 1 : 0)
                      << ", ade " << j["ade"].get<double>() << " m, " << trace.runtime_s << " s\n";
        } else if (*evaluate) {
            const BenchmarkConfig cfg = BenchmarkConfig::from_json(read_json(config_path));
            const BenchmarkReport report = run_benchmark(cfg);
            write_report(report, cfg, out_dir);
            for (GainKind k : cfg.run.gain_kinds) {
                const KindSummary s = report.summary(k);
                std::cout << to_string(k) << ": runs " << s.runs << ", median measurements " << s.median_measurements
                          << ", median ADE " << s.median_ade << " m, success " << s.success_rate << ", runtime "
                          << s.total_runtime_s << " s\n";
            }
        } else if (*heat) {
            const Environment env = load_environment(env_path);
            const TrackingModel model = tracking_model(env, load_model(model_path));
            const TrackingConfig cfg = tracking_config(config_path);
            const Trajectory target = pick_trajectory(traj_csv, traj_id, env, model.prior.horizon);
            MeasurementSet m;
            m.noise_sd = cfg.sensor.noise_sd;
            for (int t : observed) {
                if (t < 0 || t >= model.prior.horizon) throw Error("observed timestep out of range");
                m.items.push_back({t, target.positions[static_cast<std::size_t>(t)], target.positions[static_cast<std::size_t>(t)]});
            }
            const Posterior post = compute_posterior(model, m, {}, cfg.sensor);
            const auto field = make_gain_field(parse_gain_kind(gain), model, post, cfg, t0);
            const GridSpec grid = GridSpec::uniform(env, cfg.planner.grid_nx, cfg.planner.grid_ny);
            const Heatcube cube = build_heatcube(*field, grid, t0, model.prior.horizon);
            export_heatcube_csv(cube, out_path);
            std::cout << "cube max " << cube.max() << ", occupancy(>1%) " << cube.occupancy(0.01) << '\n';
            if (!optw_out.empty()) {
                OptwInstance inst;
                inst.nodes = extract_nodes(cube, cfg.planner.threshold, cfg.planner.threshold_mode,
                                           cfg.planner.min_gain, cfg.planner.max_nodes).nodes;
                inst.start = target.positions[static_cast<std::size_t>(std::max(t0 - 1, 0))];
                inst.start_time = t0 - 1;
                inst.speed = model.robot_speed(cfg.planner);
                inst.step = cfg.planner.step;
                write_json(optw_to_json(inst), optw_out);
            }
        } else if (*synth) {
            BenchmarkConfig cfg;
            if (!config_path.empty()) cfg = BenchmarkConfig::from_json(read_json(config_path));
            const PreparedBenchmark prep = prepare_benchmark(cfg);
            save_csv(prep.train, train_out);
            save_csv(prep.test, test_out);
            if (!env_out.empty()) save_environment(prep.model.env, env_out);
            std::cout << "train " << prep.train.size() << ", test " << prep.test.size() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
