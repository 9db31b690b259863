#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace homotrack {

using Point = Eigen::Vector2d;
using Polyline = std::vector<Point>;

/// z-component of the 3D cross product of two planar vectors.
inline double cross2(const Point& a, const Point& b) {
    return a.x() * b.y() - a.y() * b.x();
}

struct Bounds {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 1.0;
    double ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double min_extent() const { return width() < height() ? width() : height(); }

    bool contains(const Point& p) const {
        return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
    }
    bool strictly_contains(const Point& p) const {
        return p.x() > xmin && p.x() < xmax && p.y() > ymin && p.y() < ymax;
    }

    /// Distance from an interior point to the nearest edge of the rectangle.
    double distance_to_boundary(const Point& p) const;

    /// Position of a boundary point along the perimeter, counter-clockwise from
    /// (xmin, ymin). Points off the boundary are projected to the nearest edge.
    double perimeter_coordinate(const Point& p) const;
    Point point_at_perimeter(double s) const;
    double perimeter() const { return 2.0 * (width() + height()); }
};

/// Convex polygon. Vertices may be given in either orientation.
struct Polygon {
    std::vector<Point> vertices;

    Point centroid() const;
    double signed_area() const;
    bool strictly_contains(const Point& p) const;
    bool contains(const Point& p) const;
};

/// Closed-segment intersection test (touching counts).
bool segments_intersect(const Point& a0, const Point& a1, const Point& b0, const Point& b1);

/// True if the closed segment touches the closed convex polygon.
bool segment_intersects_polygon(const Point& a, const Point& b, const Polygon& poly);

bool polyline_intersects_polygon(std::span<const Point> path, const Polygon& poly);

double polyline_length(std::span<const Point> path);

} // namespace homotrack
