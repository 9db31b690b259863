#include "homotrack/tracking.hpp"

#include "homotrack/errors.hpp"
#include "homotrack/hash.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace homotrack {

std::string to_string(GainKind kind) { return kind == GainKind::homotopic ? "homotopic" : "metric"; }

GainKind parse_gain_kind(const std::string& text) {
    if (text == "homotopic") return GainKind::homotopic;
    if (text == "metric") return GainKind::metric;
    throw ConfigError("unknown gain kind '" + text + "'");
}

double TrackingModel::robot_speed(const PlannerConfig& planner) const {
    if (planner.robot_speed > 0.0) return planner.robot_speed;
    if (target_speed <= 0.0) throw ConfigError("robot speed unset and no target speed in the model");
    return planner.speed_factor * target_speed;
}

int ExperimentTrace::fallback_steps() const {
    int n = 0;
    for (const auto& s : steps) n += s.fallback ? 1 : 0;
    return n;
}

std::uint64_t belief_hash(const HomotopicBelief& belief) {
    std::uint64_t h = fnv1a("", 0);
    for (std::size_t i = 0; i < belief.support.size(); ++i) {
        h = fnv1a(belief.support[i].str(), h);
        h = fnv1a(&belief.probabilities[i], sizeof(double), h);
    }
    return h;
}

Posterior compute_posterior(const TrackingModel& model, const MeasurementSet& detections,
                            const std::vector<Miss>& misses, const SensorModel& sensor) {
    const HomotopicGmm& prior = model.prior;
    detections.validate(prior.horizon);

    std::vector<Eigen::Index> observed;
    Eigen::VectorXd values(2 * static_cast<Eigen::Index>(detections.items.size()));
    for (std::size_t j = 0; j < detections.items.size(); ++j) {
        const auto& m = detections.items[j];
        observed.push_back(2 * m.t);
        observed.push_back(2 * m.t + 1);
        values.segment<2>(2 * static_cast<Eigen::Index>(j)) = m.z;
    }
    const double noise_var = detections.noise_sd * detections.noise_sd;

    Posterior post;
    post.gmm = prior;
    std::vector<double> lw(prior.size());
    for (std::size_t c = 0; c < prior.size(); ++c) {
        const auto& comp = prior.components[c];
        auto res = condition_on_coordinates<double>(comp.gaussian(), observed, values, noise_var);
        auto& out = post.gmm.components[c];
        out.mean = std::move(res.posterior.mean);
        out.cov = std::move(res.posterior.cov);
        double l = std::log(comp.weight) + res.log_likelihood;
        for (const auto& m : detections.items) {
            l += std::log(detection_prob(out, m.sensor, m.t, sensor.radius, sensor.peak));
        }
        for (const auto& m : misses) {
            const double g = detection_prob(out, m.sensor, m.t, sensor.radius, sensor.peak);
            l += g < 1.0 ? std::log1p(-g) : -std::numeric_limits<double>::infinity();
        }
        lw[c] = l;
    }
    assign_log_weights(post.gmm, lw);

    const int last_t = detections.items.empty() ? 0 : detections.items.back().t;
    post.belief = marginalized_belief(post.gmm, model.vomp, model.rays, last_t);
    post.gmm = scale_by_belief(post.gmm, post.belief);
    return post;
}

std::unique_ptr<GainField> make_gain_field(GainKind kind, const TrackingModel& model, const Posterior& post,
                                           const TrackingConfig& config, int t_begin) {
    if (kind == GainKind::homotopic) {
        return std::make_unique<HomotopicGainField>(post.gmm, post.belief, model.rays, config.sensor, t_begin);
    }
    return std::make_unique<MetricGainField>(post.gmm, config.sensor, config.planner.kappa_r, t_begin);
}

ExperimentTrace replan_loop(const TrackingModel& model, const Trajectory& target, GainKind kind,
                            const TrackingConfig& config, const MeasurementObserver& observer) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    clock::duration observer_time{};

    const int T = model.prior.horizon;
    if (static_cast<int>(target.size()) != T) {
        throw Error("target trajectory has " + std::to_string(target.size()) + " points, model expects " +
                    std::to_string(T));
    }
    const double speed = model.robot_speed(config.planner);
    const double reach = speed * config.planner.step;
    const GridSpec grid = GridSpec::uniform(model.env, config.planner.grid_nx, config.planner.grid_ny);
    const SensorModel& sensor = config.sensor;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, sensor.noise_sd);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ExperimentTrace trace;
    trace.target_id = target.id;
    trace.kind = kind;
    trace.detections.noise_sd = sensor.noise_sd;

    Point robot = target.positions.front();
    const Point z0 = target.positions.front() + Point(noise(rng), noise(rng));
    trace.detections.items.push_back({0, z0, robot});
    Posterior post = compute_posterior(model, trace.detections, trace.misses, sensor);
    if (observer) {
        const auto t0 = clock::now();
        observer(0, post);
        observer_time += clock::now() - t0;
    }

    StepRecord first;
    first.t = 0;
    first.robot = robot;
    first.attempted = first.detected = true;
    first.z = z0;
    first.belief_hash = belief_hash(post.belief);
    trace.steps.push_back(first);

    for (int t = 1; t < T; ++t) {
        StepRecord rec;
        rec.t = t;

        const auto field = make_gain_field(kind, model, post, config, t);
        const Heatcube cube = build_heatcube(*field, grid, t, T);
        if (t == 1) trace.first_cube_occupancy = cube.occupancy(0.01);
        const NodeExtraction ex =
            extract_nodes(cube, config.planner.threshold, config.planner.threshold_mode,
                          config.planner.min_gain, config.planner.max_nodes);
        rec.fallback = ex.fallback || ex.nodes.empty();

        std::optional<OptwNode> goal;
        if (!ex.nodes.empty()) {
            OptwInstance inst{ex.nodes, robot, t - 1, speed, config.planner.step};
            try {
                const MctsResult plan =
                    mcts_plan(inst, {config.planner.iterations, config.planner.kappa,
                                     config.seed * 1000003ull + static_cast<std::uint64_t>(t)});
                goal = inst.nodes[static_cast<std::size_t>(plan.first)];
            } catch (const NoFeasibleAction&) {
                rec.fallback = true;
            }
        }

        if (goal) {
            rec.action = goal->id;
            rec.goal = goal->location;
            const Point delta = goal->location - robot;
            const double dist = delta.norm();
            const bool arrives = dist <= reach + 1e-9;
            robot = arrives ? goal->location : Point(robot + delta * (reach / dist));
            if (arrives && t >= goal->t_open && t <= goal->t_close) {
                rec.attempted = true;
                const Point& truth = target.positions[static_cast<std::size_t>(t)];
                const double p = sensor.peak * std::exp(-(robot - truth).squaredNorm() /
                                                        (2.0 * sensor.radius * sensor.radius));
                if (unit(rng) < p) {
                    rec.detected = true;
                    rec.z = truth + Point(noise(rng), noise(rng));
                    trace.detections.items.push_back({t, *rec.z, robot});
                } else {
                    trace.misses.push_back({t, robot});
                }
                post = compute_posterior(model, trace.detections, trace.misses, sensor);
                if (rec.detected && observer) {
                    const auto t0 = clock::now();
                    observer(trace.measurement_count() - 1, post);
                    observer_time += clock::now() - t0;
                }
            }
        }
        rec.robot = robot;
        rec.belief_hash = belief_hash(post.belief);
        trace.steps.push_back(rec);
    }

    trace.final = std::move(post);
    trace.runtime_s = std::chrono::duration<double>(clock::now() - started - observer_time).count();
    return trace;
}

nlohmann::json trace_to_json(const ExperimentTrace& trace) {
    nlohmann::json j;
    j["target"] = trace.target_id;
    j["gain"] = to_string(trace.kind);
    j["runtime_s"] = trace.runtime_s;
    j["measurements"] = trace.measurement_count();
    j["steps"] = nlohmann::json::array();
    for (const auto& s : trace.steps) {
        nlohmann::json r{{"t", s.t},
                         {"robot", {s.robot.x(), s.robot.y()}},
                         {"action", s.action},
                         {"attempted", s.attempted},
                         {"detected", s.detected},
                         {"belief_hash", s.belief_hash},
                         {"fallback", s.fallback}};
        if (s.goal) r["goal"] = {s.goal->x(), s.goal->y()};
        if (s.z) r["z"] = {s.z->x(), s.z->y()};
        j["steps"].push_back(r);
    }
    nlohmann::json belief = nlohmann::json::array();
    for (std::size_t i = 0; i < trace.final.belief.support.size(); ++i) {
        belief.push_back({{"word", trace.final.belief.support[i].str()}, {"p", trace.final.belief.probabilities[i]}});
    }
    j["final_belief"] = belief;
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& c : trace.final.gmm.components) {
        weights.push_back({{"class", c.label.signature.str()}, {"submode", c.label.submode}, {"weight", c.weight}});
    }
    j["final_weights"] = weights;
    return j;
}

} // namespace homotrack
