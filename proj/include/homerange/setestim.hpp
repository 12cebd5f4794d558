#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "homerange/detail/bucket_index.hpp"
#include "homerange/detail/edt.hpp"
#include "homerange/detail/marching_squares.hpp"
#include "homerange/geometry.hpp"
#include "homerange/grid.hpp"

namespace homerange {

struct PointCloud {
    std::vector<Vec2> points;
};

struct HullResult {
    RegionMask mask;
    std::vector<std::vector<Vec2>> boundary;  // closed contour loops of the mask
    double r = 0.0;
};

namespace detail {

// Snap a coordinate to the index of the nearest fine-lattice node.
inline int snap_index(double x, double origin, double spacing, int n) {
    const int i = static_cast<int>(std::lround((x - origin) / spacing));
    return std::clamp(i, 0, n - 1);
}

}  // namespace detail

// r-convex hull of a point cloud, realized on a grid.
//
// A cell center g is excluded when some open ball of radius r covers g while
// staying at distance >= r from every sample. Candidate ball centers are
// enumerated on the mask grid refined by `center_divisor` (candidate spacing
// cs = grid.spacing / center_divisor); a qualifying candidate excludes the
// cells lying within r - cs*sqrt(2) of it. Sample cells are always occupied.
//
// The construction runs as two exact lattice distance transforms: one from
// the samples to find qualifying candidates (with an exact-distance repair
// pass where snapping could misclassify), one from the qualifying candidates
// to mark coverage. Output matches the direct enumeration bit for bit.
inline HullResult rconvex_hull(const PointCloud& cloud, double r, const Grid2D& grid,
                               int center_divisor = 4) {
    if (cloud.points.empty()) throw std::invalid_argument("rconvex_hull: empty point cloud");
    for (Vec2 p : cloud.points) {
        if (!is_finite(p)) throw std::invalid_argument("rconvex_hull: non-finite sample");
    }
    validate(grid);
    if (!(r > 0.0)) throw std::invalid_argument("rconvex_hull: r must be > 0");
    if (r < 2.0 * grid.spacing) {
        throw std::invalid_argument("rconvex_hull: r < 2*spacing, grid cannot resolve the hull");
    }
    if (center_divisor < 1) throw std::invalid_argument("rconvex_hull: center_divisor >= 1");
    const Bbox cloud_box = Bbox::of_points(cloud.points);
    if (!grid.covers(cloud_box.dilated(2.0 * r))) {
        throw std::invalid_argument(
            "rconvex_hull: grid must cover the cloud bounding box dilated by 2r");
    }

    const double cs = grid.spacing / center_divisor;
    const int nfx = (grid.nx - 1) * center_divisor + 1;
    const int nfy = (grid.ny - 1) * center_divisor + 1;
    const std::size_t nf = static_cast<std::size_t>(nfx) * nfy;

    // Fine-lattice sites at the snapped sample positions.
    std::vector<std::uint8_t> cells(nf, 0);
    for (Vec2 p : cloud.points) {
        const int i = detail::snap_index(p.x, grid.origin.x, cs, nfx);
        const int j = detail::snap_index(p.y, grid.origin.y, cs, nfy);
        cells[static_cast<std::size_t>(j) * nfx + i] = 1;
    }

    std::vector<std::uint16_t> rowdist(nf);
    detail::edt_row_pass(cells.data(), nfx, nfy, rowdist.data());

    // Classify candidates against dist-to-cloud >= r. Snapping moves each
    // sample by at most cs/sqrt(2), so only candidates inside that margin of
    // the threshold need the exact nearest-neighbour check.
    const double snap_margin = cs * 0.7071067811865476 + 1e-12;
    const double lo = r - snap_margin, hi = r + snap_margin;
    const double lo_sq = lo > 0.0 ? lo * lo : 0.0, hi_sq = hi * hi;
    const double cs_sq = cs * cs;

    std::vector<std::pair<int, int>> uncertain;
    std::fill(cells.begin(), cells.end(), 0);  // reused as the candidate set E
    detail::edt_column_pass(
        rowdist.data(), nfx, nfy, [](int) { return true; },
        [&](int i, int j, std::int64_t dsq_lattice) {
            double dsq = std::numeric_limits<double>::infinity();
            if (dsq_lattice != detail::kInfDistSq) dsq = static_cast<double>(dsq_lattice) * cs_sq;
            if (dsq >= hi_sq) {
                cells[static_cast<std::size_t>(j) * nfx + i] = 1;
            } else if (dsq > lo_sq) {
                uncertain.emplace_back(i, j);
            }
        });

    if (!uncertain.empty()) {
        const detail::BucketIndex index(cloud.points);
        const double cap_sq = hi_sq * 1.0000001;
        for (auto [i, j] : uncertain) {
            const Vec2 c{grid.origin.x + i * cs, grid.origin.y + j * cs};
            const double dsq = index.nearest_sq(c, cap_sq);
            if (dsq >= r * r) cells[static_cast<std::size_t>(j) * nfx + i] = 1;
        }
    }

    // Coverage: a mask cell is excluded when some qualifying candidate lies
    // within the conservative marking radius.
    detail::edt_row_pass(cells.data(), nfx, nfy, rowdist.data());
    const double mark = r - cs * 1.4142135623730951;
    const double mark_sq = mark > 0.0 ? mark * mark : 0.0;

    RegionMask mask = make_empty_mask(grid);
    detail::edt_column_pass(
        rowdist.data(), nfx, nfy,
        [&](int j) { return j % center_divisor == 0; },
        [&](int i, int j, std::int64_t dsq_lattice) {
            if (i % center_divisor != 0) return;
            const bool excluded = dsq_lattice != detail::kInfDistSq &&
                                  static_cast<double>(dsq_lattice) * cs_sq < mark_sq;
            if (!excluded) {
                mask.occupancy[mask.grid.index(i / center_divisor, j / center_divisor)] = 1;
            }
        });

    // Samples belong to their hull by definition.
    for (Vec2 p : cloud.points) {
        const int i = detail::snap_index(p.x, grid.origin.x, grid.spacing, grid.nx);
        const int j = detail::snap_index(p.y, grid.origin.y, grid.spacing, grid.ny);
        mask.occupancy[mask.grid.index(i, j)] = 1;
    }

    HullResult out{std::move(mask), {}, r};
    std::vector<double> field(out.mask.occupancy.begin(), out.mask.occupancy.end());
    for (auto& chain : detail::marching_squares(grid, field, 0.5)) {
        out.boundary.push_back(std::move(chain.vertices));
    }
    return out;
}

// Definitional membership test used as the test oracle: `query` belongs to
// the r-convex hull unless some candidate ball center on the fine lattice
// anchored at the query covers it while staying >= r from the cloud.
// Exhaustive and slow; test use only.
inline bool rconvex_membership_oracle(const PointCloud& cloud, double r, Vec2 query,
                                      double center_spacing) {
    if (cloud.points.empty()) {
        throw std::invalid_argument("rconvex_membership_oracle: empty point cloud");
    }
    if (!(center_spacing > 0.0) || center_spacing > r / 20.0) {
        throw std::invalid_argument("rconvex_membership_oracle: need 0 < center_spacing <= r/20");
    }
    const double r_sq = r * r;
    const auto min_dist_sq_to_cloud = [&](Vec2 c) {
        double best = std::numeric_limits<double>::infinity();
        for (Vec2 p : cloud.points) best = std::min(best, dist_sq(c, p));
        return best;
    };
    const int m = static_cast<int>(std::floor(r / center_spacing));
    for (int dj = -m; dj <= m; ++dj) {
        for (int di = -m; di <= m; ++di) {
            const Vec2 c{query.x + di * center_spacing, query.y + dj * center_spacing};
            if (dist_sq(c, query) >= r_sq) continue;
            if (min_dist_sq_to_cloud(c) >= r_sq) return false;
        }
    }
    return true;
}

// --- set distances ----------------------------------------------------------

inline std::vector<Vec2> mask_points(const RegionMask& mask) {
    std::vector<Vec2> pts;
    pts.reserve(mask.count());
    for (int j = 0; j < mask.grid.ny; ++j) {
        for (int i = 0; i < mask.grid.nx; ++i) {
            if (mask.get(i, j)) pts.push_back(mask.grid.center(i, j));
        }
    }
    return pts;
}

// Hausdorff distance between finite point sets (masks are compared through
// their occupied cell centers). Exact pairwise distances via the bucket
// index; identical arithmetic to the brute-force double loop.
inline double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty input set");
    const auto directed_max_sq = [](std::span<const Vec2> from, const detail::BucketIndex& to) {
        double worst = 0.0;
        for (Vec2 p : from) {
            double d = to.nearest_sq(p, worst);  // below current max: irrelevant
            if (d == std::numeric_limits<double>::infinity()) d = to.nearest_sq(p);
            if (d > worst) worst = d;
        }
        return worst;
    };
    const detail::BucketIndex ib(std::vector<Vec2>(b.begin(), b.end()));
    const detail::BucketIndex ia(std::vector<Vec2>(a.begin(), a.end()));
    return std::sqrt(std::max(directed_max_sq(a, ib), directed_max_sq(b, ia)));
}

inline double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    return hausdorff(std::span<const Vec2>(a), std::span<const Vec2>(b));
}

inline double hausdorff(const RegionMask& a, const RegionMask& b) {
    return hausdorff(mask_points(a), mask_points(b));
}

inline double hausdorff(const std::vector<Vec2>& a, const RegionMask& b) {
    return hausdorff(a, mask_points(b));
}

// d_mu(A, B) = mu(A \ B) + mu(B \ A) on a shared grid.
inline double distance_in_measure(const RegionMask& a, const RegionMask& b) {
    detail::require_same_grid(a, b, "distance_in_measure");
    std::size_t diff = 0;
    for (std::size_t k = 0; k < a.occupancy.size(); ++k) {
        diff += ((a.occupancy[k] != 0) != (b.occupancy[k] != 0));
    }
    return static_cast<double>(diff) * a.grid.spacing * a.grid.spacing;
}

}  // namespace homerange
