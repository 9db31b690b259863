#include "homotrack/topology.hpp"

#include "homotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace homotrack {

namespace {

bool is_convex(const Polygon& poly) {
    const std::size_t n = poly.vertices.size();
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point e0 = poly.vertices[(i + 1) % n] - poly.vertices[i];
        const Point e1 = poly.vertices[(i + 2) % n] - poly.vertices[(i + 1) % n];
        const double c = cross2(e0, e1);
        if (c == 0.0) continue;
        const int s = c > 0.0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return sign != 0;
}

bool polygons_touch(const Polygon& a, const Polygon& b) {
    const std::size_t n = a.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segment_intersects_polygon(a.vertices[i], a.vertices[(i + 1) % n], b)) return true;
    }
    return b.contains(a.vertices.front()) || a.contains(b.vertices.front());
}

} // namespace

void Environment::validate() const {
    if (!(bounds.xmax > bounds.xmin && bounds.ymax > bounds.ymin)) {
        throw InvalidEnvironment("bounds must have positive extent");
    }
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const auto& ob = obstacles[i];
        const std::string tag = "obstacle " + std::to_string(i + 1);
        if (ob.shape.vertices.size() < 3) throw InvalidEnvironment(tag + " needs at least 3 vertices");
        if (!is_convex(ob.shape)) throw InvalidEnvironment(tag + " is not convex");
        if (!ob.shape.strictly_contains(ob.rep_point)) {
            throw InvalidEnvironment(tag + ": representative point not strictly inside");
        }
        for (const auto& v : ob.shape.vertices) {
            if (!bounds.strictly_contains(v)) throw InvalidEnvironment(tag + " leaves the bounds");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (polygons_touch(ob.shape, obstacles[j].shape)) {
                throw InvalidEnvironment(tag + " touches obstacle " + std::to_string(j + 1));
            }
        }
    }
}

HWord HWord::extended(int letter) const {
    HWord w(letters);
    w.letters.push_back(letter);
    return w;
}

std::string HWord::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < letters.size(); ++i) {
        if (i) os << ',';
        os << (letters[i] > 0 ? "+" : "") << letters[i];
    }
    os << ')';
    return os.str();
}

HWord HWord::parse(const std::string& text) {
    std::string body;
    for (char c : text) {
        if (c != '(' && c != ')' && c != ' ') body.push_back(c);
    }
    HWord w;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const int v = std::stoi(item);
        if (v == 0) throw Error("letter 0 is not a valid h-signature letter");
        w.letters.push_back(v);
    }
    return w;
}

std::vector<Ray> build_rays(const Environment& env) {
    std::vector<Ray> rays;
    rays.reserve(env.obstacles.size());
    const auto clear_of_others = [&](std::size_t self, const Point& a, const Point& b) {
        for (std::size_t j = 0; j < env.obstacles.size(); ++j) {
            if (j != self && segment_intersects_polygon(a, b, env.obstacles[j].shape)) return false;
        }
        return true;
    };

    for (std::size_t i = 0; i < env.obstacles.size(); ++i) {
        const auto& ob = env.obstacles[i];
        Ray ray;
        ray.letter = static_cast<int>(i) + 1;
        ray.origin = ob.rep_point;
        if (ob.ray_endpoint) {
            ray.endpoint = *ob.ray_endpoint;
            if (!clear_of_others(i, ray.origin, ray.endpoint)) {
                throw ConstructionFailed("explicit ray " + std::to_string(ray.letter) +
                                         " crosses another obstacle");
            }
        } else {
            const Point down(ob.rep_point.x(), env.bounds.ymin);
            const Point up(ob.rep_point.x(), env.bounds.ymax);
            if (clear_of_others(i, ob.rep_point, down)) {
                ray.endpoint = down;
            } else if (clear_of_others(i, ob.rep_point, up)) {
                ray.endpoint = up;
            } else {
                throw ConstructionFailed("no vertical ray available for obstacle " +
                                         std::to_string(ray.letter) +
                                         "; supply ray_endpoint explicitly");
            }
        }
        rays.push_back(ray);
    }

    for (std::size_t i = 0; i < rays.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (segments_intersect(rays[i].origin, rays[i].endpoint, rays[j].origin, rays[j].endpoint)) {
                throw ConstructionFailed("rays " + std::to_string(rays[j].letter) + " and " +
                                         std::to_string(rays[i].letter) + " intersect");
            }
        }
    }
    return rays;
}

std::vector<int> segment_crossings(const Point& p0, const Point& p1, std::span<const Ray> rays) {
    struct Hit {
        double param;
        int letter;
    };
    std::vector<Hit> hits;
    const Point s = p1 - p0;
    for (const auto& ray : rays) {
        const Point r = ray.endpoint - ray.origin;
        const double denom = cross2(r, s);
        if (denom == 0.0) continue; // parallel or tangential
        // p0 + a s = origin + b r
        const double a = cross2(ray.origin - p0, r) / -denom;
        const double b = cross2(p0 - ray.origin, s) / denom;
        if (a < 0.0 || a >= 1.0 || b < 0.0 || b > 1.0) continue;
        hits.push_back({a, denom > 0.0 ? ray.letter : -ray.letter});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Hit& x, const Hit& y) { return x.param < y.param; });
    std::vector<int> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.letter);
    return out;
}

HWord h_signature(std::span<const Point> path, std::span<const Ray> rays) {
    HWord w;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto letters = segment_crossings(path[i], path[i + 1], rays);
        w.letters.insert(w.letters.end(), letters.begin(), letters.end());
    }
    return w;
}

HWord reduce(const HWord& w) {
    std::vector<int> stack;
    stack.reserve(w.letters.size());
    for (int l : w.letters) {
        if (!stack.empty() && stack.back() == -l) stack.pop_back();
        else stack.push_back(l);
    }
    return HWord(std::move(stack), true);
}

HWord partial_h_signature(std::span<const Point> measurements, std::span<const Ray> rays) {
    if (measurements.size() < 2) return {};
    return h_signature(measurements, rays);
}

bool is_compatible(const HWord& full, const HWord& partial) {
    if (partial.size() > full.size()) return false;
    return std::equal(partial.letters.begin(), partial.letters.end(), full.letters.begin());
}

int net_letter_count(const HWord& w, int letter) {
    int n = 0;
    for (int l : w.letters) {
        if (l == letter) ++n;
        else if (l == -letter) --n;
    }
    return n;
}

Polyline quotient_closure(std::span<const Point> path, const Bounds& bounds,
                          std::span<const Ray> rays, double arc_step) {
    if (path.size() < 2) throw ConstructionFailed("closure needs at least two points");
    const double total = bounds.perimeter();
    const double s_end = bounds.perimeter_coordinate(path.back());
    const double s_start = bounds.perimeter_coordinate(path.front());
    const auto wrap = [total](double v) {
        v = std::fmod(v, total);
        return v < 0.0 ? v + total : v;
    };
    const double ccw_len = wrap(s_start - s_end);

    bool ccw_clear = true;
    bool cw_clear = true;
    for (const auto& ray : rays) {
        const double d = wrap(bounds.perimeter_coordinate(ray.endpoint) - s_end);
        if (d <= ccw_len) ccw_clear = false;
        if (d >= ccw_len || d == 0.0) cw_clear = false;
    }
    if (!ccw_clear && !cw_clear) {
        throw ConstructionFailed("both boundary arcs contain ray endpoints");
    }
    const double dir = ccw_clear ? 1.0 : -1.0;
    const double len = ccw_clear ? ccw_len : total - ccw_len;

    // Corners are kept exactly so the arc never cuts into the domain.
    const double w = bounds.width();
    const double h = bounds.height();
    const double corners[4] = {0.0, w, w + h, 2.0 * w + h};
    std::vector<double> offsets;
    for (double o = arc_step; o < len; o += arc_step) offsets.push_back(o);
    for (double c : corners) {
        const double o = dir > 0.0 ? wrap(c - s_end) : wrap(s_end - c);
        if (o > 0.0 && o < len) offsets.push_back(o);
    }
    std::sort(offsets.begin(), offsets.end());

    Polyline closed(path.begin(), path.end());
    for (double o : offsets) closed.push_back(bounds.point_at_perimeter(s_end + dir * o));
    return closed;
}

int winding_number(std::span<const Point> closed_path, const Point& center) {
    constexpr double eps = 1e-9;
    const std::size_t n = closed_path.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = closed_path[i] - center;
        const Point b = closed_path[(i + 1) % n] - center;
        const Point ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp(-a.dot(ab) / len2, 0.0, 1.0) : 0.0;
        if ((a + t * ab).norm() < eps) {
            throw UndefinedWinding("path passes through the winding centre");
        }
        total += std::atan2(cross2(a, b), a.dot(b));
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

int winding_oracle(std::span<const Point> closed_path, const Environment& env,
                   std::size_t obstacle_index) {
    return winding_number(closed_path, env.obstacles.at(obstacle_index).rep_point);
}

} // namespace homotrack
