#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "homerange/detail/edt.hpp"
#include "homerange/geometry.hpp"

namespace homerange {

// Cell-center grid: cell (i, j) has center origin + (i*spacing, j*spacing).
struct Grid2D {
    Vec2 origin;            // lower-left cell center
    double spacing = 0.0;
    int nx = 0;
    int ny = 0;

    std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    Vec2 center(int i, int j) const {
        return {origin.x + i * spacing, origin.y + j * spacing};
    }
    bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

    int nearest_i(double x) const {
        return static_cast<int>(std::lround((x - origin.x) / spacing));
    }
    int nearest_j(double y) const {
        return static_cast<int>(std::lround((y - origin.y) / spacing));
    }

    bool covers(const Bbox& box, double slack = 1e-9) const {
        return origin.x <= box.lo.x + slack && origin.y <= box.lo.y + slack &&
               origin.x + (nx - 1) * spacing >= box.hi.x - slack &&
               origin.y + (ny - 1) * spacing >= box.hi.y - slack;
    }

    friend bool operator==(const Grid2D& a, const Grid2D& b) {
        return a.origin == b.origin && a.spacing == b.spacing && a.nx == b.nx && a.ny == b.ny;
    }
};

inline void validate(const Grid2D& g) {
    if (!(g.spacing > 0.0)) throw std::invalid_argument("Grid2D: spacing must be > 0");
    if (g.nx < 1 || g.ny < 1) throw std::invalid_argument("Grid2D: nx, ny must be >= 1");
}

// Smallest grid whose cell centers start at box.lo and span past box.hi.
inline Grid2D make_grid_covering(const Bbox& box, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("make_grid_covering: spacing must be > 0");
    Grid2D g;
    g.origin = box.lo;
    g.spacing = spacing;
    g.nx = static_cast<int>(std::ceil(box.width() / spacing - 1e-12)) + 1;
    g.ny = static_cast<int>(std::ceil(box.height() / spacing - 1e-12)) + 1;
    return g;
}

struct RegionMask {
    Grid2D grid;
    std::vector<std::uint8_t> occupancy;  // one byte per cell, row-major

    bool get(int i, int j) const { return occupancy[grid.index(i, j)] != 0; }
    void set(int i, int j, bool v) { occupancy[grid.index(i, j)] = v ? 1 : 0; }
    std::size_t count() const {
        std::size_t c = 0;
        for (std::uint8_t b : occupancy) c += (b != 0);
        return c;
    }
    bool empty() const { return count() == 0; }
};

inline RegionMask make_empty_mask(const Grid2D& grid) {
    validate(grid);
    return RegionMask{grid, std::vector<std::uint8_t>(grid.cell_count(), 0)};
}

inline double measure(const RegionMask& mask) {
    return static_cast<double>(mask.count()) * mask.grid.spacing * mask.grid.spacing;
}

namespace detail {
inline void require_same_grid(const RegionMask& a, const RegionMask& b, const char* op) {
    if (!(a.grid == b.grid)) {
        throw std::invalid_argument(std::string(op) + ": masks live on different grids");
    }
}
}  // namespace detail

inline RegionMask mask_union(const RegionMask& a, const RegionMask& b) {
    detail::require_same_grid(a, b, "mask_union");
    RegionMask out = a;
    for (std::size_t k = 0; k < out.occupancy.size(); ++k) {
        out.occupancy[k] = (a.occupancy[k] || b.occupancy[k]) ? 1 : 0;
    }
    return out;
}

inline RegionMask mask_intersection(const RegionMask& a, const RegionMask& b) {
    detail::require_same_grid(a, b, "mask_intersection");
    RegionMask out = a;
    for (std::size_t k = 0; k < out.occupancy.size(); ++k) {
        out.occupancy[k] = (a.occupancy[k] && b.occupancy[k]) ? 1 : 0;
    }
    return out;
}

inline RegionMask mask_difference(const RegionMask& a, const RegionMask& b) {
    detail::require_same_grid(a, b, "mask_difference");
    RegionMask out = a;
    for (std::size_t k = 0; k < out.occupancy.size(); ++k) {
        out.occupancy[k] = (a.occupancy[k] && !b.occupancy[k]) ? 1 : 0;
    }
    return out;
}

// Center-in-domain rasterization.
inline RegionMask rasterize(const Domain& domain, const Grid2D& grid) {
    RegionMask mask = make_empty_mask(grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (contains(domain, grid.center(i, j))) mask.occupancy[grid.index(i, j)] = 1;
        }
    }
    return mask;
}

struct InnerParallelResult {
    RegionMask mask;
    bool empty = false;  // flags eps too large for the domain
};

// Cells whose centers keep a full eps-ball inside the domain, decided by an
// exact lattice distance transform to the rasterized complement. Accuracy is
// one cell band around the true inner parallel set.
inline InnerParallelResult inner_parallel_set(const Domain& domain, double eps,
                                              const Grid2D& grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("inner_parallel_set: eps must be > 0");
    validate(grid);
    const std::size_t n = grid.cell_count();
    std::vector<std::uint8_t> complement(n, 0);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (!contains(domain, grid.center(i, j))) complement[grid.index(i, j)] = 1;
        }
    }
    const auto dist_sq = detail::edt_squared(complement, grid.nx, grid.ny);
    RegionMask mask = make_empty_mask(grid);
    const double eps_sq = eps * eps;
    const double s2 = grid.spacing * grid.spacing;
    for (std::size_t k = 0; k < n; ++k) {
        if (dist_sq[k] == detail::kInfDistSq) {
            mask.occupancy[k] = 1;  // no complement anywhere on the grid
        } else {
            mask.occupancy[k] = (static_cast<double>(dist_sq[k]) * s2 >= eps_sq) ? 1 : 0;
        }
    }
    InnerParallelResult out{std::move(mask), false};
    out.empty = out.mask.empty();
    return out;
}

}  // namespace homerange
