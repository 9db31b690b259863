#pragma once

#include "homotrack/geometry.hpp"

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace homotrack {

struct Obstacle {
    Polygon shape;
    Point rep_point;                   ///< strictly interior; defaults to the centroid
    std::optional<Point> ray_endpoint; ///< explicit ray end on the boundary
};

/// Workspace with obstacles. Obstacle i (0-based) carries letter i + 1.
struct Environment {
    Bounds bounds;
    std::vector<Obstacle> obstacles;

    /// Throws InvalidEnvironment if any invariant is violated.
    void validate() const;
    int letter_count() const { return static_cast<int>(obstacles.size()); }
};

struct Ray {
    int letter = 0;
    Point origin;
    Point endpoint;

    Point direction() const { return (endpoint - origin).normalized(); }
    double length() const { return (endpoint - origin).norm(); }
    /// cross(direction, p - origin): positive on the left of the ray.
    double signed_distance(const Point& p) const { return cross2(direction(), p - origin); }
};

/// A word of signed obstacle letters. Equality and ordering look only at the
/// letters so words can key ordered containers.
struct HWord {
    std::vector<int> letters;
    bool reduced = false;

    HWord() = default;
    explicit HWord(std::vector<int> l, bool is_reduced = false)
        : letters(std::move(l)), reduced(is_reduced) {}

    bool empty() const { return letters.empty(); }
    std::size_t size() const { return letters.size(); }

    /// Copy with one letter appended (never marked reduced).
    HWord extended(int letter) const;

    /// "(+1,+2,-2)"; the empty word prints as "()".
    std::string str() const;
    static HWord parse(const std::string& text);

    friend bool operator==(const HWord& a, const HWord& b) { return a.letters == b.letters; }
    friend auto operator<=>(const HWord& a, const HWord& b) { return a.letters <=> b.letters; }
};

/// One ray per obstacle: straight down from the representative point, falling
/// back to straight up. Explicit endpoints from the environment take precedence.
/// Throws ConstructionFailed when neither direction is clear of other obstacles
/// or the resulting rays intersect each other.
std::vector<Ray> build_rays(const Environment& env);

/// Signed letters crossed by the half-open segment [p0, p1), in parameter order.
/// A crossing that increases Ray::signed_distance yields +letter.
std::vector<int> segment_crossings(const Point& p0, const Point& p1, std::span<const Ray> rays);

/// Unreduced crossing word of a polyline.
HWord h_signature(std::span<const Point> path, std::span<const Ray> rays);

/// Cancels adjacent (k, -k) pairs to a fixpoint.
HWord reduce(const HWord& w);

/// Word of the polyline through time-ordered measurements. One point gives ().
HWord partial_h_signature(std::span<const Point> measurements, std::span<const Ray> rays);

/// True iff `partial` is a letter-exact prefix of `full`.
bool is_compatible(const HWord& full, const HWord& partial);

/// Net signed count of `letter` in a word.
int net_letter_count(const HWord& w, int letter);

/// Appends the boundary arc from the path end back to its start, choosing the
/// arc that contains no ray endpoint. Both path ends must lie on the boundary.
/// Throws ConstructionFailed if both arcs contain ray endpoints.
Polyline quotient_closure(std::span<const Point> path, const Bounds& bounds,
                          std::span<const Ray> rays, double arc_step = 0.25);

/// Winding number of a closed path around an obstacle's representative point,
/// by angle accumulation. Test oracle for reduced signatures.
int winding_oracle(std::span<const Point> closed_path, const Environment& env,
                   std::size_t obstacle_index);

/// Winding number of a closed path around an arbitrary point.
int winding_number(std::span<const Point> closed_path, const Point& center);

} // namespace homotrack
