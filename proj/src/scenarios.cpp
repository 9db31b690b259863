#include "homotrack/scenarios.hpp"

namespace homotrack {

namespace {

Obstacle box(double x0, double y0, double x1, double y1) {
    Obstacle ob;
    ob.shape.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    ob.rep_point = ob.shape.centroid();
    return ob;
}

} // namespace

Environment three_obstacle_environment() {
    Environment env;
    env.bounds = {0.0, 0.0, 40.0, 20.0};
    env.obstacles = {box(8, 7, 12, 13), box(18, 4, 22, 10), box(28, 9, 32, 15)};
    env.validate();
    return env;
}

Trajectory template_from_waypoints(std::string id, const Polyline& waypoints, int T) {
    Trajectory raw;
    raw.id = std::move(id);
    raw.positions = waypoints;
    double s = 0.0;
    raw.timestamps.push_back(0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        s += (waypoints[i] - waypoints[i - 1]).norm();
        raw.timestamps.push_back(s);
    }
    return canonicalize(raw, T);
}

std::vector<Trajectory> three_obstacle_templates(bool include_empty_class, int T) {
    const Point start(0.0, 5.0);
    std::vector<Trajectory> out;
    out.push_back(template_from_waypoints("c123", {start, {5, 2}, {40, 2}}, T));
    out.push_back(template_from_waypoints("c13", {start, {12, 4}, {16, 12}, {23, 12}, {26, 6}, {40, 6}}, T));
    out.push_back(template_from_waypoints("c12", {start, {23, 2}, {26, 16}, {40, 17}}, T));
    out.push_back(template_from_waypoints("c23", {start, {7, 15}, {13, 15}, {17, 3}, {40, 4}}, T));
    if (include_empty_class) out.push_back(template_from_waypoints("c0", {start, {7, 17}, {40, 18}}, T));
    return out;
}

} // namespace homotrack
