#include "homotrack/trajectory.hpp"

#include "homotrack/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace homotrack {

Trajectory canonicalize(const Trajectory& traj, int T) {
    if (traj.size() < 2 || traj.timestamps.size() != traj.size()) {
        throw DegenerateTrajectory("trajectory '" + traj.id + "' needs at least two timed points");
    }
    if (T < 2) throw DegenerateTrajectory("canonical length must be at least 2");
    const double t0 = traj.timestamps.front();
    const double duration = traj.timestamps.back() - t0;
    if (!(duration > 0.0)) throw DegenerateTrajectory("trajectory '" + traj.id + "' has zero duration");

    Trajectory out;
    out.id = traj.id;
    out.positions.reserve(T);
    out.timestamps.reserve(T);
    std::size_t seg = 0;
    for (int k = 0; k < T; ++k) {
        out.timestamps.push_back(static_cast<double>(k));
        if (k == 0) {
            out.positions.push_back(traj.positions.front());
            continue;
        }
        if (k == T - 1) {
            out.positions.push_back(traj.positions.back());
            continue;
        }
        const double tau = t0 + duration * static_cast<double>(k) / static_cast<double>(T - 1);
        while (seg + 2 < traj.size() && traj.timestamps[seg + 1] <= tau) ++seg;
        const double ta = traj.timestamps[seg];
        const double tb = traj.timestamps[seg + 1];
        const double w = tb > ta ? (tau - ta) / (tb - ta) : 0.0;
        if (w == 0.0) out.positions.push_back(traj.positions[seg]);
        else out.positions.push_back((1.0 - w) * traj.positions[seg] + w * traj.positions[seg + 1]);
    }
    return out;
}

Eigen::VectorXd flatten(const Trajectory& traj) {
    Eigen::VectorXd v(2 * static_cast<Eigen::Index>(traj.size()));
    for (std::size_t t = 0; t < traj.size(); ++t) v.segment<2>(2 * static_cast<Eigen::Index>(t)) = traj.positions[t];
    return v;
}

bool endpoints_on_boundary(const Trajectory& traj, const Bounds& bounds) {
    if (traj.positions.empty()) return false;
    const double eps = 0.05 * bounds.min_extent();
    return bounds.distance_to_boundary(traj.positions.front()) <= eps &&
           bounds.distance_to_boundary(traj.positions.back()) <= eps;
}

namespace {

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

double parse_double(const std::string& field, std::size_t line, const char* name) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParseError(std::string("invalid ") + name + " value '" + field + "'", line);
    }
    return v;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trajectory file " + path.string());

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) return {};
    ++lineno;
    if (trim(line) != "id,t,x,y") throw ParseError("expected header 'id,t,x,y'", lineno);

    Dataset ds;
    std::set<std::string> finished;
    Trajectory current;
    std::size_t current_first_line = 0;

    const auto flush = [&]() {
        if (current.id.empty() && current.positions.empty()) return;
        finished.insert(current.id);
        if (options.bounds && !endpoints_on_boundary(current, *options.bounds)) {
            if (!options.skip_boundary_violations) {
                throw BoundaryViolation("trajectory '" + current.id + "' (line " +
                                        std::to_string(current_first_line) +
                                        ") does not start and end on the boundary");
            }
            std::cerr << "warning: skipping trajectory '" << current.id
                      << "': endpoints not on the boundary\n";
        } else {
            ds.trajectories.push_back(std::move(current));
        }
        current = Trajectory{};
    };

    while (std::getline(in, line)) {
        ++lineno;
        const std::string row = trim(line);
        if (row.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(row);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(trim(f));
        if (fields.size() != 4) throw ParseError("expected 4 fields", lineno);
        if (fields[0].empty()) throw ParseError("empty id", lineno);

        const double t = parse_double(fields[1], lineno, "t");
        const Point p(parse_double(fields[2], lineno, "x"), parse_double(fields[3], lineno, "y"));

        if (fields[0] != current.id || current.positions.empty()) {
            if (!current.positions.empty()) flush();
            if (finished.count(fields[0])) {
                throw ParseError("rows for id '" + fields[0] + "' are not contiguous", lineno);
            }
            current.id = fields[0];
            current_first_line = lineno;
        } else if (t <= current.timestamps.back()) {
            throw ParseError("timestamps for id '" + current.id + "' must strictly increase", lineno);
        }
        current.positions.push_back(p);
        current.timestamps.push_back(t);
    }
    if (!current.positions.empty()) flush();
    return ds;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "id,t,x,y\n";
    for (const auto& traj : dataset.trajectories) {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            out << traj.id << ',' << traj.timestamps[i] << ',' << traj.positions[i].x() << ','
                << traj.positions[i].y() << '\n';
        }
    }
}

Dataset cluster_by_signature(Dataset dataset, std::span<const Ray> rays) {
    dataset.signatures.clear();
    dataset.signatures.reserve(dataset.size());
    for (const auto& traj : dataset.trajectories) dataset.signatures.push_back(h_signature(traj.positions, rays));
    return dataset;
}

ClassMap class_map(const Dataset& dataset) {
    if (!dataset.labelled()) throw Error("dataset has not been clustered by signature");
    ClassMap map;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        map[dataset.signatures[i]].push_back(dataset.trajectories[i].id);
    }
    return map;
}

Dataset filter_classes(const Dataset& dataset, const std::function<bool(const HWord&)>& keep) {
    if (!dataset.labelled()) throw Error("dataset has not been clustered by signature");
    Dataset out;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (keep(dataset.signatures[i])) {
            out.trajectories.push_back(dataset.trajectories[i]);
            out.signatures.push_back(dataset.signatures[i]);
        }
    }
    return out;
}

namespace {

bool sample_is_admissible(const Environment& env, std::span<const Ray> rays, const Polyline& path,
                          const HWord& target) {
    for (const auto& p : path) {
        if (!env.bounds.contains(p)) return false;
    }
    for (const auto& ob : env.obstacles) {
        if (polyline_intersects_polygon(path, ob.shape)) return false;
    }
    return h_signature(path, rays) == target;
}

} // namespace

Dataset synthesize_dataset(const Environment& env, std::span<const Ray> rays,
                           std::span<const Trajectory> templates, int samples_per_template,
                           const GpParams& params, std::uint64_t seed) {
    Dataset ds;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (std::size_t k = 0; k < templates.size(); ++k) {
        const Trajectory& tmpl = templates[k];
        const auto T = static_cast<Eigen::Index>(tmpl.size());
        const HWord target = h_signature(tmpl.positions, rays);

        // Pinned squared-exponential covariance over the interior indices.
        Eigen::MatrixXd L;
        const Eigen::Index n_in = std::max<Eigen::Index>(T - 2, 0);
        if (params.amplitude > 0.0 && n_in > 0) {
            const double a2 = params.amplitude * params.amplitude;
            const double l2 = params.length_scale * params.length_scale;
            const auto kern = [&](Eigen::Index i, Eigen::Index j) {
                const double d = static_cast<double>(i - j);
                return a2 * std::exp(-0.5 * d * d / l2);
            };
            Eigen::MatrixXd K(T, T);
            for (Eigen::Index i = 0; i < T; ++i)
                for (Eigen::Index j = 0; j < T; ++j) K(i, j) = kern(i, j);
            Eigen::MatrixXd Kie(n_in, 2);
            Kie.col(0) = K.block(1, 0, n_in, 1);
            Kie.col(1) = K.block(1, T - 1, n_in, 1);
            Eigen::Matrix2d Kee;
            Kee << K(0, 0), K(0, T - 1), K(T - 1, 0), K(T - 1, T - 1);
            Eigen::MatrixXd pinned = K.block(1, 1, n_in, n_in) - Kie * Kee.inverse() * Kie.transpose();
            pinned.diagonal().array() += 1e-9 * a2;
            Eigen::LLT<Eigen::MatrixXd> llt(pinned);
            if (llt.info() != Eigen::Success) throw NumericalFailure("GP covariance is not positive definite");
            L = llt.matrixL();
        }

        for (int s = 0; s < samples_per_template; ++s) {
            Trajectory sample;
            std::ostringstream id;
            id << (tmpl.id.empty() ? "tmpl" + std::to_string(k) : tmpl.id) << '_' << std::setw(4)
               << std::setfill('0') << s;
            sample.id = id.str();
            sample.timestamps = tmpl.timestamps;

            if (L.size() == 0) {
                sample.positions = tmpl.positions;
                ds.trajectories.push_back(std::move(sample));
                continue;
            }
            int rejections = 0;
            while (true) {
                Eigen::VectorXd xi(n_in);
                Eigen::VectorXd eta(n_in);
                for (Eigen::Index i = 0; i < n_in; ++i) xi(i) = normal(rng);
                for (Eigen::Index i = 0; i < n_in; ++i) eta(i) = normal(rng);
                const Eigen::VectorXd dx = L * xi;
                const Eigen::VectorXd dy = L * eta;
                sample.positions = tmpl.positions;
                for (Eigen::Index i = 0; i < n_in; ++i) sample.positions[i + 1] += Point(dx(i), dy(i));
                if (sample_is_admissible(env, rays, sample.positions, target)) break;
                if (++rejections > params.max_rejections) {
                    throw RejectionBudgetExceeded("template '" + tmpl.id + "': more than " +
                                                  std::to_string(params.max_rejections) +
                                                  " rejected draws for one sample");
                }
            }
            ds.trajectories.push_back(std::move(sample));
        }
    }
    return cluster_by_signature(std::move(ds), rays);
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, int train_per_class, int test_per_class,
                                  std::uint64_t seed) {
    if (!dataset.labelled()) throw Error("dataset has not been clustered by signature");
    std::map<HWord, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) members[dataset.signatures[i]].push_back(i);

    std::mt19937_64 rng(seed);
    Dataset train;
    Dataset test;
    for (auto& [word, idx] : members) {
        const auto need = static_cast<std::size_t>(train_per_class + test_per_class);
        if (idx.size() < need) {
            throw InsufficientClassMembers("class " + word.str() + " has " + std::to_string(idx.size()) +
                                           " members, needs " + std::to_string(need));
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t j = 0; j < need; ++j) {
            Dataset& dst = j < static_cast<std::size_t>(train_per_class) ? train : test;
            dst.trajectories.push_back(dataset.trajectories[idx[j]]);
            dst.signatures.push_back(word);
        }
    }
    return {std::move(train), std::move(test)};
}

double mean_speed(const Dataset& dataset) {
    if (dataset.trajectories.empty()) return 0.0;
    double total = 0.0;
    for (const auto& traj : dataset.trajectories) {
        const double dt = traj.timestamps.back() - traj.timestamps.front();
        total += dt > 0.0 ? polyline_length(traj.positions) / dt : 0.0;
    }
    return total / static_cast<double>(dataset.size());
}

} // namespace homotrack
