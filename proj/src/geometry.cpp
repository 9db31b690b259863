#include "homotrack/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace homotrack {

double Bounds::distance_to_boundary(const Point& p) const {
    return std::min({p.x() - xmin, xmax - p.x(), p.y() - ymin, ymax - p.y()});
}

double Bounds::perimeter_coordinate(const Point& p) const {
    const double dl = std::abs(p.x() - xmin);
    const double dr = std::abs(xmax - p.x());
    const double db = std::abs(p.y() - ymin);
    const double dt = std::abs(ymax - p.y());
    const double w = width();
    const double h = height();
    const double best = std::min({dl, dr, db, dt});
    const double x = std::clamp(p.x(), xmin, xmax);
    const double y = std::clamp(p.y(), ymin, ymax);
    if (best == db) return x - xmin;
    if (best == dr) return w + (y - ymin);
    if (best == dt) return w + h + (xmax - x);
    return 2.0 * w + h + (ymax - y);
}

Point Bounds::point_at_perimeter(double s) const {
    const double w = width();
    const double h = height();
    const double total = perimeter();
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
    if (s <= w) return {xmin + s, ymin};
    if (s <= w + h) return {xmax, ymin + (s - w)};
    if (s <= 2.0 * w + h) return {xmax - (s - w - h), ymax};
    return {xmin, ymax - (s - 2.0 * w - h)};
}

double Polygon::signed_area() const {
    double a = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        a += cross2(vertices[i], vertices[(i + 1) % n]);
    }
    return 0.5 * a;
}

Point Polygon::centroid() const {
    const double a = signed_area();
    const std::size_t n = vertices.size();
    if (std::abs(a) < 1e-15) {
        Point c = Point::Zero();
        for (const auto& v : vertices) c += v;
        return c / static_cast<double>(n);
    }
    Point c = Point::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = vertices[i];
        const Point& q = vertices[(i + 1) % n];
        c += (p + q) * cross2(p, q);
    }
    return c / (6.0 * a);
}

bool Polygon::strictly_contains(const Point& p) const {
    const double orient = signed_area() > 0.0 ? 1.0 : -1.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point e = vertices[(i + 1) % n] - vertices[i];
        if (orient * cross2(e, p - vertices[i]) <= 0.0) return false;
    }
    return true;
}

bool Polygon::contains(const Point& p) const {
    const double orient = signed_area() > 0.0 ? 1.0 : -1.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point e = vertices[(i + 1) % n] - vertices[i];
        if (orient * cross2(e, p - vertices[i]) < 0.0) return false;
    }
    return true;
}

namespace {

int orientation(const Point& a, const Point& b, const Point& c) {
    const double v = cross2(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

} // namespace

bool segments_intersect(const Point& a0, const Point& a1, const Point& b0, const Point& b1) {
    const int o1 = orientation(a0, a1, b0);
    const int o2 = orientation(a0, a1, b1);
    const int o3 = orientation(b0, b1, a0);
    const int o4 = orientation(b0, b1, a1);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a0, a1, b0)) return true;
    if (o2 == 0 && on_segment(a0, a1, b1)) return true;
    if (o3 == 0 && on_segment(b0, b1, a0)) return true;
    if (o4 == 0 && on_segment(b0, b1, a1)) return true;
    return false;
}

bool segment_intersects_polygon(const Point& a, const Point& b, const Polygon& poly) {
    if (poly.contains(a) || poly.contains(b)) return true;
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segments_intersect(a, b, poly.vertices[i], poly.vertices[(i + 1) % n])) return true;
    }
    return false;
}

bool polyline_intersects_polygon(std::span<const Point> path, const Polygon& poly) {
    if (path.size() == 1) return poly.contains(path[0]);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (segment_intersects_polygon(path[i], path[i + 1], poly)) return true;
    }
    return false;
}

double polyline_length(std::span<const Point> path) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) len += (path[i + 1] - path[i]).norm();
    return len;
}

} // namespace homotrack
