#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "homerange/geometry.hpp"
#include "homerange/grid.hpp"
#include "test_support.hpp"

using namespace homerange;
using Catch::Approx;

namespace {

// Brute-force inner-parallel oracle: the center and 64 directions on the
// eps-circle must all lie inside the domain.
RegionMask inner_parallel_oracle(const Domain& domain, double eps, const Grid2D& grid) {
    RegionMask mask = make_empty_mask(grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 c = grid.center(i, j);
            if (!contains(domain, c)) continue;
            bool ok = true;
            for (int k = 0; k < 64 && ok; ++k) {
                const double th = 2.0 * std::numbers::pi * k / 64.0;
                ok = contains(domain, {c.x + eps * std::cos(th), c.y + eps * std::sin(th)});
            }
            if (ok) mask.set(i, j, true);
        }
    }
    return mask;
}

std::size_t boundary_cell_count(const RegionMask& m) {
    std::size_t n = 0;
    for (int j = 0; j < m.grid.ny; ++j) {
        for (int i = 0; i < m.grid.nx; ++i) {
            if (!m.get(i, j)) continue;
            const bool interior = i > 0 && i + 1 < m.grid.nx && j > 0 && j + 1 < m.grid.ny &&
                                  m.get(i - 1, j) && m.get(i + 1, j) && m.get(i, j - 1) &&
                                  m.get(i, j + 1);
            if (!interior) ++n;
        }
    }
    return n;
}

}  // namespace

TEST_CASE("study domain membership", "[geometry]") {
    const Domain S = make_study_domain();
    CHECK(contains(S, {0.0, 0.0}));
    CHECK_FALSE(contains(S, {0.8, 0.0}));  // center of the removed disk
    CHECK_FALSE(contains(S, {2.0, 0.0}));  // outside the ellipse
    // boundary counts as inside
    CHECK(contains(S, {1.5, 0.0}));
    CHECK(contains(S, {0.3, 0.0}));
    // removed disk is open on our side: its rim belongs to S
    CHECK(contains(S, {0.8, 0.5}));
}

TEST_CASE("removed disk lies strictly inside the ellipse", "[geometry]") {
    // prerequisite for measure(S) = mu(E) - mu(disk)
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 10000.0;
        const double x = 0.8 + 0.5 * std::cos(th);
        const double y = 0.5 * std::sin(th);
        worst = std::max(worst, 4.0 * x * x / 9.0 + y * y);
    }
    CHECK(worst < 1.0);
}

TEST_CASE("reflection mirrors across the nearest boundary", "[geometry]") {
    const Domain half = make_halfplane_domain();
    const Vec2 a = reflect(half, {3.0, -0.2});
    CHECK(a.x == Approx(3.0).margin(1e-12));
    CHECK(a.y == Approx(0.2).margin(1e-12));

    const Domain disk = make_disk_domain({0.0, 0.0}, 1.0);
    const Vec2 b = reflect(disk, {1.1, 0.0});
    CHECK(b.x == Approx(0.9).margin(1e-12));
    CHECK(b.y == Approx(0.0).margin(1e-12));

    // inside the removed disk of the study set: nearest boundary (0.3, 0)
    const Domain S = make_study_domain();
    const Vec2 c = reflect(S, {0.35, 0.0});
    CHECK(c.x == Approx(0.25).margin(1e-12));
    CHECK(c.y == Approx(0.0).margin(1e-12));

    // boundary points map to themselves
    const Vec2 d = reflect(S, {0.3, 0.0});
    CHECK(d.x == Approx(0.3).margin(1e-9));
    CHECK(d.y == Approx(0.0).margin(1e-9));
}

TEST_CASE("reflection isometry and determinism on exterior probes", "[geometry]") {
    const Domain S = make_study_domain();
    auto gen = test_support::rng(515601);
    const auto probes = test_support::exterior_probes(gen, S, 1000);
    for (const Vec2 p : probes) {
        const Vec2 y = reflect(S, p);
        const Vec2 mid = 0.5 * (p + y);
        // midpoint sits on the boundary: its own projection is itself
        const BoundaryProjection proj = nearest_boundary_point(S, mid);
        REQUIRE(proj.distance < 1e-6);
        // isometry: both sides are equidistant from the midpoint
        REQUIRE(std::abs(dist(p, mid) - dist(y, mid)) < 1e-9);
        // determinism
        const Vec2 y2 = reflect(S, p);
        REQUIRE(y.x == y2.x);
        REQUIRE(y.y == y2.y);
    }
}

TEST_CASE("inner parallel set of a disk", "[geometry]") {
    const Domain disk = make_disk_domain({0.0, 0.0}, 1.0);
    const Grid2D grid = make_grid_covering(disk.bbox, 0.01);

    const auto half = inner_parallel_set(disk, 0.5, grid);
    CHECK_FALSE(half.empty);
    // concentric disk of radius 0.5, one-cell-band accuracy
    CHECK(measure(half.mask) == Approx(std::numbers::pi / 4.0).margin(0.07));
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (half.mask.get(i, j)) {
                REQUIRE(norm(grid.center(i, j)) <= 0.5 + 2.0 * grid.spacing);
            }
        }
    }

    const auto toobig = inner_parallel_set(disk, 1.5, grid);
    CHECK(toobig.empty);
    CHECK(measure(toobig.mask) == 0.0);
}

TEST_CASE("inner parallel set matches the directional oracle", "[geometry]") {
    const Domain S = make_study_domain();
    const Grid2D grid = make_grid_covering(S.bbox, 0.01);
    const auto result = inner_parallel_set(S, 0.1, grid);
    const RegionMask oracle = inner_parallel_oracle(S, 0.1, grid);
    const double band = static_cast<double>(boundary_cell_count(oracle)) * grid.spacing *
                        grid.spacing;
    CHECK(std::abs(measure(result.mask) - measure(oracle)) <= 2.0 * band);
}

TEST_CASE("inner parallel set is monotone in eps", "[geometry]") {
    const Domain S = make_study_domain();
    const Grid2D grid = make_grid_covering(S.bbox, 0.02);
    const auto small = inner_parallel_set(S, 0.05, grid);
    const auto large = inner_parallel_set(S, 0.2, grid);
    for (std::size_t k = 0; k < small.mask.occupancy.size(); ++k) {
        if (large.mask.occupancy[k]) REQUIRE(small.mask.occupancy[k]);
    }
}

TEST_CASE("mask measure basics", "[geometry]") {
    Grid2D g{{0.0, 0.0}, 0.1, 10, 10};
    RegionMask empty = make_empty_mask(g);
    CHECK(measure(empty) == 0.0);
    RegionMask full = empty;
    std::fill(full.occupancy.begin(), full.occupancy.end(), 1);
    CHECK(measure(full) == Approx(1.0).margin(1e-15));
}

TEST_CASE("study set area matches the exact ellipse/disk areas", "[geometry]") {
    const Domain S = make_study_domain();
    const Grid2D grid = make_grid_covering(S.bbox, 0.005);
    const RegionMask mask = rasterize(S, grid);
    const double exact = 1.5 * std::numbers::pi - std::numbers::pi / 4.0;  // 5*pi/4
    CHECK(std::abs(measure(mask) - exact) < 0.01);
}

TEST_CASE("measure is additive over disjoint masks", "[geometry]") {
    auto gen = test_support::rng(99);
    Grid2D g{{0.0, 0.0}, 0.05, 40, 30};
    RegionMask a = make_empty_mask(g), b = make_empty_mask(g);
    std::uniform_int_distribution<int> coin(0, 2);
    for (std::size_t k = 0; k < g.cell_count(); ++k) {
        const int c = coin(gen);
        if (c == 0) a.occupancy[k] = 1;
        if (c == 1) b.occupancy[k] = 1;
    }
    const RegionMask u = mask_union(a, b);
    CHECK(measure(u) == Approx(measure(a) + measure(b)).margin(1e-12));
}

TEST_CASE("mask algebra is cellwise and grid-checked", "[geometry]") {
    Grid2D g{{0.0, 0.0}, 1.0, 3, 2};
    RegionMask a = make_empty_mask(g), b = make_empty_mask(g);
    a.set(0, 0, true);
    a.set(1, 0, true);
    b.set(1, 0, true);
    b.set(2, 1, true);
    CHECK(mask_union(a, b).count() == 3);
    CHECK(mask_intersection(a, b).count() == 1);
    CHECK(mask_difference(a, b).count() == 1);

    Grid2D g2{{0.0, 0.0}, 0.5, 3, 2};
    RegionMask c = make_empty_mask(g2);
    CHECK_THROWS_AS(mask_union(a, c), std::invalid_argument);
}

TEST_CASE("covering number bound", "[geometry]") {
    CHECK(covering_number_bound(4.0, std::numbers::pi, 2) == Approx(1.0).epsilon(1e-12));
    CHECK(covering_number_bound(2.0, std::numbers::pi, 2) == Approx(4.0).epsilon(1e-12));
    // eps = 0.2, mu_S = 5*pi/4: (0.05)^{-2} * (5 pi / 4) / pi = 400 * 5/4 = 500
    const double mu_S = 5.0 * std::numbers::pi / 4.0;
    const double omega2 = std::pow(std::numbers::pi, 1.0) / std::tgamma(2.0);  // independent
    CHECK(covering_number_bound(0.2, mu_S, 2) ==
          Approx(std::pow(0.05, -2.0) * mu_S / omega2).epsilon(1e-12));
    CHECK(covering_number_bound(0.2, mu_S, 2) == Approx(500.0).epsilon(1e-12));

    // decreasing in eps, linear in mu_S
    double prev = covering_number_bound(0.1, 1.0, 2);
    for (double eps : {0.2, 0.4, 0.8, 1.6}) {
        const double cur = covering_number_bound(eps, 1.0, 2);
        REQUIRE(cur < prev);
        prev = cur;
    }
    CHECK(covering_number_bound(0.3, 7.0, 2) ==
          Approx(7.0 * covering_number_bound(0.3, 1.0, 2)).epsilon(1e-12));

    // unit-ball volumes used by the bound
    CHECK(unit_ball_volume(1) == Approx(2.0).epsilon(1e-12));
    CHECK(unit_ball_volume(2) == Approx(std::numbers::pi).epsilon(1e-12));
    CHECK(unit_ball_volume(3) == Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-12));
}

TEST_CASE("grid invariants", "[geometry]") {
    Grid2D g{{-2.0, 1.0}, 0.25, 8, 5};
    CHECK(g.center(0, 0).x == -2.0);
    CHECK(g.center(3, 2).x == -2.0 + 3 * 0.25);
    CHECK(g.center(3, 2).y == 1.0 + 2 * 0.25);
    CHECK(g.nearest_i(-1.24) == 3);
    CHECK(g.nearest_j(1.51) == 2);

    const Grid2D cover = make_grid_covering({{0.0, 0.0}, {1.0, 1.0}}, 0.3);
    CHECK(cover.covers({{0.0, 0.0}, {1.0, 1.0}}));
    CHECK_THROWS_AS(make_grid_covering({{0.0, 0.0}, {1.0, 1.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("domain bbox invariant holds on a grid scan", "[geometry]") {
    const Domain S = make_study_domain();
    const Grid2D grid = make_grid_covering(S.bbox.dilated(0.5), 0.02);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 c = grid.center(i, j);
            if (contains(S, c)) REQUIRE(S.bbox.contains(c));
        }
    }
}

TEST_CASE("no isolated occupied cells at finer resolution", "[geometry]") {
    // S equals the closure of its interior up to grid resolution: every
    // occupied cell at spacing rho has an occupied neighbor at rho/2.
    const Domain S = make_study_domain();
    const Grid2D coarse = make_grid_covering(S.bbox, 0.04);
    const Grid2D fine = make_grid_covering(S.bbox, 0.02);
    const RegionMask cm = rasterize(S, coarse);
    const RegionMask fm = rasterize(S, fine);
    for (int j = 0; j < coarse.ny; ++j) {
        for (int i = 0; i < coarse.nx; ++i) {
            if (!cm.get(i, j)) continue;
            const Vec2 c = coarse.center(i, j);
            bool neighbor = false;
            const int fi = fine.nearest_i(c.x), fj = fine.nearest_j(c.y);
            for (int dj = -1; dj <= 1 && !neighbor; ++dj) {
                for (int di = -1; di <= 1 && !neighbor; ++di) {
                    const int ii = fi + di, jj = fj + dj;
                    if ((di != 0 || dj != 0) && fine.in_range(ii, jj) && fm.get(ii, jj)) {
                        neighbor = true;
                    }
                }
            }
            REQUIRE(neighbor);
        }
    }
}

TEST_CASE("lattice distance transform equals brute force", "[geometry]") {
    auto gen = test_support::rng(123321);
    std::uniform_int_distribution<int> udim(1, 40);
    std::uniform_real_distribution<double> ufill(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int nx = udim(gen), ny = udim(gen);
        const double fill = ufill(gen) * 0.3;
        std::vector<std::uint8_t> sites(static_cast<std::size_t>(nx) * ny, 0);
        for (auto& s : sites) s = ufill(gen) < fill ? 1 : 0;
        const auto fast = detail::edt_squared(sites, nx, ny);
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                std::int64_t best = detail::kInfDistSq;
                for (int sj = 0; sj < ny; ++sj) {
                    for (int si = 0; si < nx; ++si) {
                        if (!sites[static_cast<std::size_t>(sj) * nx + si]) continue;
                        const std::int64_t d = static_cast<std::int64_t>(si - i) * (si - i) +
                                               static_cast<std::int64_t>(sj - j) * (sj - j);
                        best = std::min(best, d);
                    }
                }
                REQUIRE(fast[static_cast<std::size_t>(j) * nx + i] == best);
            }
        }
    }
}

TEST_CASE("reflect rejects non-finite queries", "[geometry]") {
    const Domain S = make_study_domain();
    CHECK_THROWS_AS(reflect(S, {std::numeric_limits<double>::quiet_NaN(), 0.0}), GeometryError);
}
