#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "homerange/detail/marching_squares.hpp"
#include "homerange/detail/parallel.hpp"
#include "homerange/geometry.hpp"
#include "homerange/grid.hpp"

namespace homerange {

enum class KernelFamily { gaussian, epanechnikov };

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double bandwidth = 0.2;
};

inline void validate(const KernelSpec& k) {
    if (!(k.bandwidth > 0.0)) throw std::invalid_argument("KernelSpec: bandwidth must be > 0");
}

// Bivariate kernels normalized to integrate to 1 over the plane.
inline double kernel_value(KernelFamily family, double u_sq) {
    switch (family) {
        case KernelFamily::gaussian:
            return std::exp(-0.5 * u_sq) / (2.0 * std::numbers::pi);
        case KernelFamily::epanechnikov:
            return u_sq < 1.0 ? (2.0 / std::numbers::pi) * (1.0 - u_sq) : 0.0;
    }
    return 0.0;
}

// Radius beyond which the kernel is treated as zero (in bandwidth units).
// The Gaussian tail beyond 8.5 bandwidths is below 2e-16 of the peak.
inline double kernel_support_radius(KernelFamily family) {
    return family == KernelFamily::gaussian ? 8.5 : 1.0;
}

struct DensityProvenance {
    bool is_true_density = false;  // true density vs kernel estimate
    std::size_t n = 0;             // sample size (kde)
    double bandwidth = 0.0;        // (kde)
    KernelFamily kernel = KernelFamily::gaussian;
    double normalizer = 0.0;       // quadrature constant c (true density)
    std::string potential;         // potential name (true density)
};

struct DensityField {
    Grid2D grid;
    std::vector<double> values;
    DensityProvenance provenance;

    double max_value() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
    double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * grid.spacing * grid.spacing;
    }
};

// Kernel density estimate evaluated at every cell center:
// ghat(x) = 1/(n h^2) sum_i K((x - X_i)/h).
inline DensityField kde(std::span<const Vec2> points, const KernelSpec& kernel,
                        const Grid2D& grid) {
    if (points.empty()) throw std::invalid_argument("kde: empty sample");
    validate(kernel);
    validate(grid);

    const double h = kernel.bandwidth;
    const double cutoff = kernel_support_radius(kernel.family) * h;
    const double cutoff_sq = cutoff * cutoff;
    const double inv_h_sq = 1.0 / (h * h);
    const double scale = inv_h_sq / static_cast<double>(points.size());

    // Bucket samples on a coarse lattice so each cell only visits nearby
    // buckets; with wide kernels this degrades gracefully to the full sum.
    const double bucket = cutoff;
    const Bbox pts_box = Bbox::of_points({points.begin(), points.end()});
    const int bx = std::max(1, static_cast<int>(std::ceil((pts_box.width() + 1e-12) / bucket)));
    const int by = std::max(1, static_cast<int>(std::ceil((pts_box.height() + 1e-12) / bucket)));
    std::vector<std::vector<Vec2>> buckets(static_cast<std::size_t>(bx) * by);
    for (Vec2 p : points) {
        const int i = std::clamp(static_cast<int>((p.x - pts_box.lo.x) / bucket), 0, bx - 1);
        const int j = std::clamp(static_cast<int>((p.y - pts_box.lo.y) / bucket), 0, by - 1);
        buckets[static_cast<std::size_t>(j) * bx + i].push_back(p);
    }

    DensityField field;
    field.grid = grid;
    field.values.assign(grid.cell_count(), 0.0);
    field.provenance.is_true_density = false;
    field.provenance.n = points.size();
    field.provenance.bandwidth = h;
    field.provenance.kernel = kernel.family;

    detail::parallel_for(static_cast<std::size_t>(grid.ny), [&](std::size_t row) {
        const int j = static_cast<int>(row);
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 x = grid.center(i, j);
            const int bi0 = static_cast<int>(std::floor((x.x - cutoff - pts_box.lo.x) / bucket));
            const int bi1 = static_cast<int>(std::floor((x.x + cutoff - pts_box.lo.x) / bucket));
            const int bj0 = static_cast<int>(std::floor((x.y - cutoff - pts_box.lo.y) / bucket));
            const int bj1 = static_cast<int>(std::floor((x.y + cutoff - pts_box.lo.y) / bucket));
            double sum = 0.0;
            for (int bj = std::max(bj0, 0); bj <= std::min(bj1, by - 1); ++bj) {
                for (int bi = std::max(bi0, 0); bi <= std::min(bi1, bx - 1); ++bi) {
                    for (Vec2 p : buckets[static_cast<std::size_t>(bj) * bx + bi]) {
                        const double d_sq = dist_sq(x, p);
                        if (d_sq > cutoff_sq) continue;
                        sum += kernel_value(kernel.family, d_sq * inv_h_sq);
                    }
                }
            }
            field.values[grid.index(i, j)] = sum * scale;
        }
    });
    return field;
}

// Named potentials f with nu = -1/2 grad f. "quadratic" is the study case
// f = x^2 + y^2; "quartic" exists for finite-difference convergence tests.
inline std::function<double(Vec2)> potential_by_name(const std::string& name) {
    if (name == "quadratic") return [](Vec2 p) { return p.x * p.x + p.y * p.y; };
    if (name == "quartic") {
        return [](Vec2 p) {
            return 0.5 * (p.x * p.x * p.x * p.x + p.y * p.y * p.y * p.y);
        };
    }
    throw std::invalid_argument("unknown potential '" + name + "' (expected quadratic | quartic)");
}

// g = e^{-f} 1_S / c with c the grid quadrature of e^{-f} over S.
inline DensityField true_density(const Domain& domain, const std::string& potential,
                                 const Grid2D& grid) {
    validate(grid);
    const auto f = potential_by_name(potential);
    DensityField field;
    field.grid = grid;
    field.values.assign(grid.cell_count(), 0.0);
    double total = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 x = grid.center(i, j);
            if (!contains(domain, x)) continue;
            const double v = std::exp(-f(x));
            field.values[grid.index(i, j)] = v;
            total += v;
        }
    }
    const double c = total * grid.spacing * grid.spacing;
    if (!(c > 0.0)) {
        throw std::invalid_argument("true_density: domain rasterizes to measure zero");
    }
    for (double& v : field.values) v /= c;
    field.provenance.is_true_density = true;
    field.provenance.normalizer = c;
    field.provenance.potential = potential;
    return field;
}

// Occupancy of the upper level set {field > lambda}.
inline RegionMask level_region(const DensityField& field, double lambda) {
    RegionMask mask = make_empty_mask(field.grid);
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        mask.occupancy[k] = field.values[k] > lambda ? 1 : 0;
    }
    return mask;
}

// Boundary polylines of {field > lambda}; empty level set gives an empty
// list. Chains cut by the grid edge come back open.
inline std::vector<std::vector<Vec2>> level_set_contours(const DensityField& field,
                                                         double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("level_set_contours: lambda must be > 0");
    std::vector<std::vector<Vec2>> out;
    for (auto& chain : detail::marching_squares(field.grid, field.values, lambda)) {
        out.push_back(std::move(chain.vertices));
    }
    return out;
}

// Largest lambda whose strict upper level set {field > lambda} carries at
// least `mass_fraction` of the field's total mass (used for core-area picks).
inline double mass_quantile_level(const DensityField& field, double mass_fraction) {
    if (!(mass_fraction > 0.0) || !(mass_fraction < 1.0)) {
        throw std::invalid_argument("mass_quantile_level: fraction must be in (0, 1)");
    }
    std::vector<double> sorted = field.values;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double cell = field.grid.spacing * field.grid.spacing;
    const double target = mass_fraction * field.mass();
    // walk runs of equal values: mass of {> v} is the prefix sum before v's run
    double prefix = 0.0;
    std::size_t k = 0;
    while (k < sorted.size()) {
        const double v = sorted[k];
        double run = 0.0;
        while (k < sorted.size() && sorted[k] == v) {
            run += sorted[k];
            ++k;
        }
        if ((prefix + run) * cell >= target || k == sorted.size()) {
            // {field > lambda} for any lambda just below v includes this run;
            // the largest representable such lambda is the next smaller value
            if (k < sorted.size() && sorted[k] > 0.0) return sorted[k];
            return 0.5 * v;  // keep lambda positive when the tail is all zeros
        }
        prefix += run;
    }
    return 0.0;
}

namespace detail {

inline double point_polyline_dist_sq(Vec2 p, const std::vector<Vec2>& poly) {
    double best = std::numeric_limits<double>::infinity();
    if (poly.size() == 1) return dist_sq(p, poly.front());
    for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
        best = std::min(best, point_segment_dist_sq(p, poly[k], poly[k + 1]));
    }
    // contour loops store the closing edge implicitly
    best = std::min(best, point_segment_dist_sq(p, poly.back(), poly.front()));
    return best;
}

}  // namespace detail

// Hausdorff distance between two families of polylines: vertex sets with
// point-to-segment refinement, both directions.
inline double contour_hausdorff(const std::vector<std::vector<Vec2>>& a,
                                const std::vector<std::vector<Vec2>>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("contour_hausdorff: empty input");
    const auto directed = [](const std::vector<std::vector<Vec2>>& from,
                             const std::vector<std::vector<Vec2>>& to) {
        double worst = 0.0;
        for (const auto& poly : from) {
            for (Vec2 v : poly) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& other : to) {
                    best = std::min(best, detail::point_polyline_dist_sq(v, other));
                }
                worst = std::max(worst, best);
            }
        }
        return worst;
    };
    return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

// Plug-in drift estimate nu_hat = 1/2 grad log(field) by central differences
// at the nearest cell center. Stencil values at or below the floor
// (1e-8 * max) raise instead of returning garbage.
inline Vec2 drift_estimate(const DensityField& field, Vec2 point) {
    const Grid2D& g = field.grid;
    const int i = g.nearest_i(point.x);
    const int j = g.nearest_j(point.y);
    if (i < 1 || i > g.nx - 2 || j < 1 || j > g.ny - 2) {
        throw std::invalid_argument("drift_estimate: point too close to the grid edge");
    }
    const double floor = 1e-8 * field.max_value();
    const double vxp = field.values[g.index(i + 1, j)];
    const double vxm = field.values[g.index(i - 1, j)];
    const double vyp = field.values[g.index(i, j + 1)];
    const double vym = field.values[g.index(i, j - 1)];
    for (double v : {vxp, vxm, vyp, vym}) {
        if (v <= floor) {
            throw std::invalid_argument("drift_estimate: density too small for drift estimation here");
        }
    }
    const double inv = 1.0 / (2.0 * g.spacing);
    return {0.5 * (std::log(vxp) - std::log(vxm)) * inv,
            0.5 * (std::log(vyp) - std::log(vym)) * inv};
}

}  // namespace homerange
