#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homerange/setestim.hpp"
#include "test_support.hpp"

using namespace homerange;
using Catch::Approx;

namespace {

// Quadratic-time reference with the same arithmetic as the production path.
double hausdorff_double_loop(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    const auto directed = [](const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
        double worst = 0.0;
        for (const Vec2 p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec2 q : to) best = std::min(best, dist_sq(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

std::vector<Vec2> segment_cloud() {
    std::vector<Vec2> pts;
    for (int k = 0; k <= 200; ++k) pts.push_back({-1.0 + k * 0.01, 0.0});
    return pts;
}

std::vector<Vec2> disk_raster_points(Vec2 center, double radius, double spacing) {
    std::vector<Vec2> pts;
    const Grid2D g = make_grid_covering(
        {{center.x - radius, center.y - radius}, {center.x + radius, center.y + radius}}, spacing);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (dist(g.center(i, j), center) <= radius) pts.push_back(g.center(i, j));
        }
    }
    return pts;
}

// Chebyshev distance from cell (i, j) to the nearest mask-boundary cell.
bool near_mask_boundary(const RegionMask& mask, int i, int j, int radius) {
    const Grid2D& g = mask.grid;
    const auto is_boundary = [&](int bi, int bj) {
        const bool v = mask.get(bi, bj);
        for (const auto& [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const int ni = bi + di, nj = bj + dj;
            if (!g.in_range(ni, nj) || mask.get(ni, nj) != v) return true;
        }
        return false;
    };
    for (int bj = std::max(0, j - radius); bj <= std::min(g.ny - 1, j + radius); ++bj) {
        for (int bi = std::max(0, i - radius); bi <= std::min(g.nx - 1, i + radius); ++bi) {
            if (is_boundary(bi, bj)) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("hull of a singleton is its cell", "[setestim]") {
    const Grid2D grid = make_grid_covering({{-1.0, -1.0}, {1.0, 1.0}}, 0.05);
    const PointCloud cloud{{{0.0, 0.0}}};
    for (double r : {0.2, 0.45}) {
        const HullResult hull = rconvex_hull(cloud, r, grid);
        CHECK(hull.mask.count() == 1);
        CHECK(hull.mask.get(grid.nearest_i(0.0), grid.nearest_j(0.0)));
    }
}

TEST_CASE("two far-apart points hull to exactly two cells", "[setestim]") {
    const Grid2D grid = make_grid_covering({{-2.0, -2.0}, {2.0, 2.0}}, 0.05);
    const PointCloud cloud{{{-0.6, 0.0}, {0.6, 0.0}}};  // distance 1.2 > 2r
    const HullResult hull = rconvex_hull(cloud, 0.5, grid);
    CHECK(hull.mask.count() == 2);
}

TEST_CASE("hull rejects unresolvable radii and bad grids", "[setestim]") {
    const Grid2D grid = make_grid_covering({{-1.0, -1.0}, {1.0, 1.0}}, 0.05);
    CHECK_THROWS_AS(rconvex_hull(PointCloud{{{0.0, 0.0}}}, 0.08, grid), std::invalid_argument);
    CHECK_THROWS_AS(rconvex_hull(PointCloud{}, 0.5, grid), std::invalid_argument);
    // grid must cover the cloud dilated by 2r
    CHECK_THROWS_AS(rconvex_hull(PointCloud{{{0.9, 0.0}}}, 0.5, grid), std::invalid_argument);
}

TEST_CASE("membership oracle on the segment cloud", "[setestim]") {
    const PointCloud cloud{segment_cloud()};
    // sample points always belong to the hull
    CHECK(rconvex_membership_oracle(cloud, 0.5, cloud.points[150], 0.01));
    // an empty ball centered near (0, 0.9) covers (0, 0.4)
    CHECK_FALSE(rconvex_membership_oracle(cloud, 0.5, {0.0, 0.4}, 0.01));
    // just above the segment every covering ball meets the cloud
    CHECK(rconvex_membership_oracle(cloud, 0.5, {0.0, 0.005}, 0.01));
    // center-spacing precondition
    CHECK_THROWS_AS(rconvex_membership_oracle(cloud, 0.5, {0.0, 0.0}, 0.1),
                    std::invalid_argument);
}

TEST_CASE("hull agrees with the definitional oracle away from its boundary", "[setestim]") {
    auto gen = test_support::rng(2024);
    for (int instance = 0; instance < 5; ++instance) {
        std::uniform_int_distribution<int> npts(3, 20);
        std::uniform_real_distribution<double> ur(0.3, 0.7);
        const double r = ur(gen);
        const auto pts = test_support::uniform_points_in(gen, {{-0.5, -0.5}, {0.5, 0.5}},
                                                         static_cast<std::size_t>(npts(gen)));
        const PointCloud cloud{pts};
        const double spacing = 0.05;
        const Grid2D grid = make_grid_covering(Bbox::of_points(pts).dilated(2.0 * r + spacing),
                                               spacing);
        const int divisor = 4;
        const HullResult hull = rconvex_hull(cloud, r, grid, divisor);
        // oracle lattice must refine the mask grid so both tests enumerate
        // the same candidate centers
        double cs = spacing / divisor;
        while (cs > r / 20.0) cs /= 2.0;
        for (int j = 0; j < grid.ny; ++j) {
            for (int i = 0; i < grid.nx; ++i) {
                if (near_mask_boundary(hull.mask, i, j, 2)) continue;
                const bool expected = rconvex_membership_oracle(cloud, r, grid.center(i, j), cs);
                REQUIRE(hull.mask.get(i, j) == expected);
            }
        }
    }
}

TEST_CASE("hull is monotone in r and contains its samples", "[setestim]") {
    auto gen = test_support::rng(77);
    const auto pts = test_support::uniform_points_in(gen, {{-0.6, -0.4}, {0.6, 0.4}}, 40);
    const Grid2D grid = make_grid_covering({{-2.2, -2.0}, {2.2, 2.0}}, 0.04);
    const HullResult small = rconvex_hull(PointCloud{pts}, 0.3, grid);
    const HullResult large = rconvex_hull(PointCloud{pts}, 0.8, grid);
    for (std::size_t k = 0; k < small.mask.occupancy.size(); ++k) {
        if (small.mask.occupancy[k]) REQUIRE(large.mask.occupancy[k]);
    }
    for (const Vec2 p : pts) {
        REQUIRE(small.mask.get(grid.nearest_i(p.x), grid.nearest_j(p.y)));
    }
}

TEST_CASE("huge r approaches the convex hull", "[setestim]") {
    auto gen = test_support::rng(31415);
    const auto pts = test_support::uniform_points_in(gen, {{-0.4, -0.4}, {0.4, 0.4}}, 8);
    const double diameter = 1.2;  // bound for points in the box
    const double r = 10.0 * diameter;
    const double spacing = 0.05;
    const Grid2D grid =
        make_grid_covering(Bbox::of_points(pts).dilated(2.0 * r + spacing), spacing);
    const HullResult hull = rconvex_hull(PointCloud{pts}, r, grid);

    // convex hull via monotone chain
    std::vector<Vec2> sorted = pts;
    std::sort(sorted.begin(), sorted.end(), [](Vec2 a, Vec2 b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    const auto cross = [](Vec2 o, Vec2 a, Vec2 b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Vec2> ch;
    for (const Vec2 p : sorted) {
        while (ch.size() >= 2 && cross(ch[ch.size() - 2], ch.back(), p) <= 0) ch.pop_back();
        ch.push_back(p);
    }
    const std::size_t lower = ch.size() + 1;
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        while (ch.size() >= lower && cross(ch[ch.size() - 2], ch.back(), *it) <= 0) ch.pop_back();
        ch.push_back(*it);
    }
    ch.pop_back();

    const auto inside_convex = [&](Vec2 q) {
        for (std::size_t k = 0; k < ch.size(); ++k) {
            if (cross(ch[k], ch[(k + 1) % ch.size()], q) < 0) return false;
        }
        return true;
    };
    const auto boundary_dist = [&](Vec2 q) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ch.size(); ++k) {
            best = std::min(best,
                            detail::point_segment_dist_sq(q, ch[k], ch[(k + 1) % ch.size()]));
        }
        return std::sqrt(best);
    };

    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Vec2 c = grid.center(i, j);
            if (hull.mask.get(i, j) != inside_convex(c)) {
                REQUIRE(boundary_dist(c) <= 2.0 * spacing);  // one-cell band
            }
        }
    }
}

TEST_CASE("bucket index nearest neighbour equals brute force", "[setestim]") {
    auto gen = test_support::rng(606060);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> unum(1, 400);
        const auto pts =
            test_support::uniform_points_in(gen, {{-1.0, -1.0}, {1.0, 1.0}},
                                            static_cast<std::size_t>(unum(gen)));
        const detail::BucketIndex index(pts);
        for (int q = 0; q < 50; ++q) {
            // queries inside, near, and far outside the point box
            const Vec2 query = test_support::uniform_in(gen, {{-3.0, -3.0}, {3.0, 3.0}});
            double best = std::numeric_limits<double>::infinity();
            for (const Vec2 p : pts) best = std::min(best, dist_sq(query, p));
            REQUIRE(index.nearest_sq(query) == best);
            // capped queries: below the cap means exact, above means +inf
            const double cap = 0.5 * best;
            REQUIRE(index.nearest_sq(query, cap) == std::numeric_limits<double>::infinity());
            REQUIRE(index.nearest_sq(query, best * 1.0000001) == best);
        }
    }
}

TEST_CASE("hausdorff basics and oracle equality", "[setestim]") {
    const std::vector<Vec2> a{{0.0, 0.0}};
    const std::vector<Vec2> b{{3.0, 4.0}};
    CHECK(hausdorff(a, a) == 0.0);
    CHECK(hausdorff(a, b) == 5.0);

    auto gen = test_support::rng(555);
    std::vector<Vec2> cloud;
    while (cloud.size() < 10) {
        const Vec2 p = test_support::uniform_in(gen, {{-1.0, -1.0}, {1.0, 1.0}});
        if (norm(p) <= 1.0) cloud.push_back(p);
    }
    const auto raster = disk_raster_points({0.0, 0.0}, 1.0, 0.02);
    CHECK(hausdorff(cloud, raster) == hausdorff_double_loop(cloud, raster));

    CHECK_THROWS_AS(hausdorff(std::vector<Vec2>{}, b), std::invalid_argument);
}

TEST_CASE("hausdorff metric axioms on random triples", "[setestim]") {
    auto gen = test_support::rng(808);
    const Bbox box{{-2.0, -2.0}, {2.0, 2.0}};
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = test_support::uniform_points_in(gen, box, 6);
        const auto b = test_support::uniform_points_in(gen, box, 9);
        const auto c = test_support::uniform_points_in(gen, box, 5);
        const double ab = hausdorff(a, b), ba = hausdorff(b, a);
        REQUIRE(ab == ba);
        REQUIRE(hausdorff(a, a) == 0.0);
        REQUIRE(ab <= hausdorff(a, c) + hausdorff(c, b) + 1e-12);
    }
}

TEST_CASE("distance in measure", "[setestim]") {
    Grid2D g{{0.0, 0.0}, 0.1, 12, 10};
    RegionMask a = make_empty_mask(g), b = make_empty_mask(g);
    a.set(1, 1, true);
    a.set(2, 1, true);
    b.set(5, 5, true);
    CHECK(distance_in_measure(a, a) == 0.0);
    CHECK(distance_in_measure(a, b) == Approx(measure(a) + measure(b)).margin(1e-15));

    Grid2D g2{{0.0, 0.0}, 0.2, 12, 10};
    CHECK_THROWS_AS(distance_in_measure(a, make_empty_mask(g2)), std::invalid_argument);
}

TEST_CASE("two-circle symmetric difference matches the lens formula", "[setestim]") {
    const double d = 0.5, radius = 1.0;
    const Grid2D g = make_grid_covering({{-1.1, -1.1}, {1.7, 1.1}}, 0.005);
    RegionMask a = make_empty_mask(g), b = make_empty_mask(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 c = g.center(i, j);
            if (dist(c, {0.0, 0.0}) <= radius) a.set(i, j, true);
            if (dist(c, {d, 0.0}) <= radius) b.set(i, j, true);
        }
    }
    const double lens =
        2.0 * radius * radius * std::acos(d / (2.0 * radius)) -
        0.5 * d * std::sqrt(4.0 * radius * radius - d * d);
    const double exact = 2.0 * std::numbers::pi * radius * radius - 2.0 * lens;
    CHECK(distance_in_measure(a, b) == Approx(exact).epsilon(0.01));
}

TEST_CASE("hull boundary polylines trace the mask", "[setestim]") {
    auto gen = test_support::rng(4321);
    std::vector<Vec2> pts;
    while (pts.size() < 300) {
        const Vec2 p = test_support::uniform_in(gen, {{-1.0, -1.0}, {1.0, 1.0}});
        if (norm(p) <= 0.8) pts.push_back(p);
    }
    const Grid2D grid = make_grid_covering({{-2.0, -2.0}, {2.0, 2.0}}, 0.02);
    const HullResult hull = rconvex_hull(PointCloud{pts}, 0.4, grid);
    REQUIRE_FALSE(hull.boundary.empty());
    // every boundary vertex sits within a cell of some occupied/free edge
    for (const auto& loop : hull.boundary) {
        for (const Vec2 v : loop) {
            const int i = grid.nearest_i(v.x), j = grid.nearest_j(v.y);
            REQUIRE(near_mask_boundary(hull.mask, i, j, 1));
        }
    }
}
