#include "homotrack/environment_io.hpp"

#include "homotrack/errors.hpp"

#include <fstream>

namespace homotrack {

using nlohmann::json;

namespace {

Point point_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw InvalidEnvironment("points must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(const Point& p) { return json::array({p.x(), p.y()}); }

} // namespace

Environment environment_from_json(const json& j) {
    Environment env;
    try {
        const auto& b = j.at("bounds");
        if (!b.is_array() || b.size() != 4) throw InvalidEnvironment("bounds must be [xmin, ymin, xmax, ymax]");
        env.bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        for (const auto& o : j.value("obstacles", json::array())) {
            Obstacle ob;
            for (const auto& v : o.at("vertices")) ob.shape.vertices.push_back(point_from(v));
            ob.rep_point = o.contains("rep_point") ? point_from(o["rep_point"]) : ob.shape.centroid();
            if (o.contains("ray_endpoint")) ob.ray_endpoint = point_from(o["ray_endpoint"]);
            env.obstacles.push_back(std::move(ob));
        }
    } catch (const json::exception& e) {
        throw InvalidEnvironment(std::string("malformed environment: ") + e.what());
    }
    env.validate();
    return env;
}

json environment_to_json(const Environment& env) {
    json j;
    j["bounds"] = {env.bounds.xmin, env.bounds.ymin, env.bounds.xmax, env.bounds.ymax};
    j["obstacles"] = json::array();
    for (const auto& ob : env.obstacles) {
        json o;
        o["vertices"] = json::array();
        for (const auto& v : ob.shape.vertices) o["vertices"].push_back(point_to(v));
        o["rep_point"] = point_to(ob.rep_point);
        if (ob.ray_endpoint) o["ray_endpoint"] = point_to(*ob.ray_endpoint);
        j["obstacles"].push_back(o);
    }
    return j;
}

Environment load_environment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidEnvironment("cannot open environment file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidEnvironment("cannot parse " + path.string() + ": " + e.what());
    }
    return environment_from_json(j);
}

void save_environment(const Environment& env, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << environment_to_json(env).dump(2) << '\n';
}

} // namespace homotrack
