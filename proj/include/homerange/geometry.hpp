#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace homerange {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm_sq(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist_sq(Vec2 a, Vec2 b) { return norm_sq(a - b); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

struct Bbox {
    Vec2 lo;
    Vec2 hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    bool contains(Vec2 p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    Bbox dilated(double margin) const {
        return {{lo.x - margin, lo.y - margin}, {hi.x + margin, hi.y + margin}};
    }
    static Bbox of_points(const std::vector<Vec2>& pts) {
        if (pts.empty()) throw std::invalid_argument("Bbox::of_points: empty point list");
        Bbox b{pts.front(), pts.front()};
        for (Vec2 p : pts) {
            b.lo.x = std::min(b.lo.x, p.x);
            b.lo.y = std::min(b.lo.y, p.y);
            b.hi.x = std::max(b.hi.x, p.x);
            b.hi.y = std::max(b.hi.y, p.y);
        }
        return b;
    }
};

class GeometryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Signed primitives. Each one keeps the region where its constraint holds
// (boundary included); a Domain is the intersection of its primitives.

struct EllipseInside {
    Vec2 center;
    Vec2 semi_axes;  // (a, b), both > 0
};

struct DiskOutside {
    Vec2 center;
    double radius = 0.0;
};

struct DiskInside {
    Vec2 center;
    double radius = 0.0;
};

struct PolygonInside {
    std::vector<Vec2> vertices;  // simple polygon, any orientation
};

using Primitive = std::variant<EllipseInside, DiskOutside, DiskInside, PolygonInside>;

struct Domain {
    std::vector<Primitive> primitives;
    Bbox bbox;
    std::string name;
};

namespace detail {

inline double point_segment_dist_sq(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len_sq = norm_sq(ab);
    if (len_sq == 0.0) return dist_sq(p, a);
    double t = dot(p - a, ab) / len_sq;
    t = std::clamp(t, 0.0, 1.0);
    return dist_sq(p, a + t * ab);
}

inline Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len_sq = norm_sq(ab);
    if (len_sq == 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
    return a + t * ab;
}

// Even-odd crossing test; boundary handled by the caller via edge distance.
inline bool polygon_crossing_inside(const std::vector<Vec2>& v, Vec2 p) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double x_cross =
                v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

inline double polygon_boundary_dist_sq(const std::vector<Vec2>& v, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        best = std::min(best, point_segment_dist_sq(p, v[j], v[i]));
    }
    return best;
}

// Signed violation: <= 0 means the constraint is satisfied (closed region).
// Ellipse violation is dimensionless, the others are lengths; the mixed
// scale only matters for tolerances, which stay tiny relative to both.
inline double violation(const Primitive& prim, Vec2 p) {
    struct V {
        Vec2 p;
        double operator()(const EllipseInside& e) const {
            const double u = (p.x - e.center.x) / e.semi_axes.x;
            const double v = (p.y - e.center.y) / e.semi_axes.y;
            return u * u + v * v - 1.0;
        }
        double operator()(const DiskOutside& d) const { return d.radius - dist(p, d.center); }
        double operator()(const DiskInside& d) const { return dist(p, d.center) - d.radius; }
        double operator()(const PolygonInside& poly) const {
            const double bdist = std::sqrt(polygon_boundary_dist_sq(poly.vertices, p));
            return polygon_crossing_inside(poly.vertices, p) ? -bdist : bdist;
        }
    };
    return std::visit(V{p}, prim);
}

// Nearest point on the ellipse boundary via Newton on the parametric
// stationarity condition, seeded at the angular parameter of the query and
// a small fan of fallback seeds. Returns nullopt when no seed converges
// within the 32-iteration budget.
inline std::optional<Vec2> project_onto_ellipse(const EllipseInside& e, Vec2 q) {
    const double a = e.semi_axes.x;
    const double b = e.semi_axes.y;
    const double u = q.x - e.center.x;
    const double v = q.y - e.center.y;

    const auto phi = [&](double t, double& dphi) {
        const double ct = std::cos(t), st = std::sin(t);
        const double f = (a * ct - u) * (-a * st) + (b * st - v) * (b * ct);
        dphi = a * a * st * st - a * ct * (a * ct - u) + b * b * ct * ct -
               b * st * (b * st - v);
        return f;
    };

    const double t_seed = std::atan2(v * a, u * b);
    const double pi = std::numbers::pi;
    const double seeds[6] = {t_seed,          t_seed + pi / 3, t_seed - pi / 3,
                             t_seed + 2 * pi / 3, t_seed - 2 * pi / 3, t_seed + pi};

    std::optional<Vec2> best;
    double best_d = std::numeric_limits<double>::infinity();
    const double scale = a * a + b * b + u * u + v * v;
    for (double t : seeds) {
        bool converged = false;
        for (int it = 0; it < 32; ++it) {
            double dphi = 0.0;
            const double f = phi(t, dphi);
            if (dphi == 0.0) break;
            const double step = f / dphi;
            t -= step;
            if (std::abs(step) < 1e-13) {
                converged = true;
                break;
            }
        }
        if (!converged) continue;
        double dphi = 0.0;
        if (std::abs(phi(t, dphi)) > 1e-9 * scale) continue;
        const Vec2 cand{e.center.x + a * std::cos(t), e.center.y + b * std::sin(t)};
        const double d = dist_sq(q, cand);
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    return best;
}

inline std::optional<Vec2> project_onto_circle(Vec2 center, double radius, Vec2 q) {
    const Vec2 d = q - center;
    const double n = norm(d);
    if (n == 0.0) return Vec2{center.x + radius, center.y};  // deterministic pick
    return center + (radius / n) * d;
}

inline std::optional<Vec2> project_onto_boundary(const Primitive& prim, Vec2 q) {
    struct P {
        Vec2 q;
        std::optional<Vec2> operator()(const EllipseInside& e) const {
            return project_onto_ellipse(e, q);
        }
        std::optional<Vec2> operator()(const DiskOutside& d) const {
            return project_onto_circle(d.center, d.radius, q);
        }
        std::optional<Vec2> operator()(const DiskInside& d) const {
            return project_onto_circle(d.center, d.radius, q);
        }
        std::optional<Vec2> operator()(const PolygonInside& poly) const {
            const auto& v = poly.vertices;
            Vec2 best{};
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
                const Vec2 c = closest_point_on_segment(q, v[j], v[i]);
                const double d = dist_sq(q, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            return best;
        }
    };
    return std::visit(P{q}, prim);
}

}  // namespace detail

// Membership test with closed boundary semantics. `tol` loosens every
// primitive constraint; reflection uses a small positive tol to accept
// projected boundary points despite roundoff.
inline bool contains(const Domain& domain, Vec2 p, double tol = 0.0) {
    for (const auto& prim : domain.primitives) {
        if (detail::violation(prim, p) > tol) return false;
    }
    return true;
}

struct BoundaryProjection {
    Vec2 point;
    double distance = 0.0;
    std::size_t primitive_index = 0;
};

// Nearest point of the domain boundary among the per-primitive projections
// that land on the boundary of the domain itself. Ties keep the first
// primitive in declaration order.
inline std::optional<BoundaryProjection> try_nearest_boundary_point(const Domain& domain,
                                                                    Vec2 p) {
    std::optional<BoundaryProjection> best;
    for (std::size_t i = 0; i < domain.primitives.size(); ++i) {
        const auto cand = detail::project_onto_boundary(domain.primitives[i], p);
        if (!cand) continue;
        if (!contains(domain, *cand, 1e-9)) continue;
        const double d = dist(p, *cand);
        if (!best || d < best->distance) best = BoundaryProjection{*cand, d, i};
    }
    return best;
}

inline BoundaryProjection nearest_boundary_point(const Domain& domain, Vec2 p) {
    if (!is_finite(p)) throw GeometryError("nearest_boundary_point: non-finite query");
    const auto b = try_nearest_boundary_point(domain, p);
    if (!b) {
        throw GeometryError("nearest_boundary_point: no primitive projection converged for (" +
                            std::to_string(p.x) + ", " + std::to_string(p.y) +
                            "); malformed domain or query far outside bbox");
    }
    return *b;
}

// sym(p) = 2b - p with b the nearest boundary point. Points on the boundary
// map to themselves.
inline Vec2 reflect(const Domain& domain, Vec2 p) {
    const BoundaryProjection b = nearest_boundary_point(domain, p);
    return 2.0 * b.point - p;
}

inline std::optional<Vec2> try_reflect(const Domain& domain, Vec2 p) {
    const auto b = try_nearest_boundary_point(domain, p);
    if (!b) return std::nullopt;
    return 2.0 * b->point - p;
}

// Volume of the d-dimensional unit ball.
inline double unit_ball_volume(int d) {
    if (d < 1) throw std::invalid_argument("unit_ball_volume: d must be >= 1");
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

// Upper bound (eps/4)^(-d) * mu_S / omega_d for the eps/2-covering number
// of the inner parallel set.
inline double covering_number_bound(double eps, double mu_S, int d) {
    if (eps <= 0.0) throw std::invalid_argument("covering_number_bound: eps must be > 0");
    if (mu_S <= 0.0) throw std::invalid_argument("covering_number_bound: mu_S must be > 0");
    return std::pow(eps / 4.0, -d) * mu_S / unit_ball_volume(d);
}

// The simulation-study domain: ellipse 4x^2/9 + y^2 <= 1 minus the open
// disk around (4/5, 0) of radius 1/2.
inline Domain make_study_domain() {
    Domain d;
    d.name = "ellipse_minus_disk";
    d.primitives.push_back(EllipseInside{{0.0, 0.0}, {1.5, 1.0}});
    d.primitives.push_back(DiskOutside{{0.8, 0.0}, 0.5});
    d.bbox = {{-1.5, -1.0}, {1.5, 1.0}};
    return d;
}

inline Domain make_disk_domain(Vec2 center, double radius, std::string name = "disk") {
    Domain d;
    d.name = std::move(name);
    d.primitives.push_back(DiskInside{center, radius});
    d.bbox = {{center.x - radius, center.y - radius}, {center.x + radius, center.y + radius}};
    return d;
}

// Large rectangle standing in for the half-plane {y >= 0} in tests and
// sanity checks; reflections near the origin only ever see the y = 0 edge.
inline Domain make_halfplane_domain(double extent = 1000.0) {
    Domain d;
    d.name = "halfplane_y_ge_0";
    d.primitives.push_back(PolygonInside{
        {{-extent, 0.0}, {extent, 0.0}, {extent, extent}, {-extent, extent}}});
    d.bbox = {{-extent, 0.0}, {extent, extent}};
    return d;
}

}  // namespace homerange
