#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "homerange/geometry.hpp"
#include "homerange/grid.hpp"

namespace homerange::detail {

// Marching squares over cell-center samples: extracts the boundary of
// {value > level} as polylines with linear edge interpolation. Saddle cells
// are disambiguated by the average-of-corners rule. Chains that close on
// themselves come back as loops (first vertex repeated nowhere); chains
// cut off by the grid edge come back open.

struct ContourChain {
    std::vector<Vec2> vertices;
    bool closed = false;
};

// Edge keys: horizontal edge right of node (i,j) -> 2*(j*nx+i); vertical edge
// above node (i,j) -> 2*(j*nx+i)+1.
inline std::vector<ContourChain> marching_squares(const Grid2D& grid,
                                                  const std::vector<double>& values,
                                                  double level) {
    const int nx = grid.nx, ny = grid.ny;
    const auto val = [&](int i, int j) { return values[grid.index(i, j)]; };
    const auto above = [&](int i, int j) { return val(i, j) > level; };

    const auto interp_h = [&](int i, int j) {  // on edge (i,j)-(i+1,j)
        const double v0 = val(i, j), v1 = val(i + 1, j);
        const double t = (level - v0) / (v1 - v0);
        Vec2 p = grid.center(i, j);
        p.x += t * grid.spacing;
        return p;
    };
    const auto interp_v = [&](int i, int j) {  // on edge (i,j)-(i,j+1)
        const double v0 = val(i, j), v1 = val(i, j + 1);
        const double t = (level - v0) / (v1 - v0);
        Vec2 p = grid.center(i, j);
        p.y += t * grid.spacing;
        return p;
    };

    const auto hkey = [&](int i, int j) {
        return (static_cast<std::int64_t>(j) * nx + i) * 2;
    };
    const auto vkey = [&](int i, int j) {
        return (static_cast<std::int64_t>(j) * nx + i) * 2 + 1;
    };

    struct Segment {
        std::int64_t a, b;  // edge keys
    };
    std::vector<Segment> segments;
    std::unordered_map<std::int64_t, Vec2> edge_point;

    const auto emit = [&](std::int64_t ka, Vec2 pa, std::int64_t kb, Vec2 pb) {
        edge_point.emplace(ka, pa);
        edge_point.emplace(kb, pb);
        segments.push_back({ka, kb});
    };

    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const bool c0 = above(i, j), c1 = above(i + 1, j);
            const bool c2 = above(i + 1, j + 1), c3 = above(i, j + 1);
            const int code = (c0 ? 1 : 0) | (c1 ? 2 : 0) | (c2 ? 4 : 0) | (c3 ? 8 : 0);
            if (code == 0 || code == 15) continue;

            const std::int64_t kb = hkey(i, j), kt = hkey(i, j + 1);
            const std::int64_t kl = vkey(i, j), kr = vkey(i + 1, j);

            switch (code) {
                case 1:
                case 14: emit(kb, interp_h(i, j), kl, interp_v(i, j)); break;
                case 2:
                case 13: emit(kb, interp_h(i, j), kr, interp_v(i + 1, j)); break;
                case 4:
                case 11: emit(kt, interp_h(i, j + 1), kr, interp_v(i + 1, j)); break;
                case 8:
                case 7: emit(kt, interp_h(i, j + 1), kl, interp_v(i, j)); break;
                case 3:
                case 12: emit(kl, interp_v(i, j), kr, interp_v(i + 1, j)); break;
                case 6:
                case 9: emit(kb, interp_h(i, j), kt, interp_h(i, j + 1)); break;
                case 5:
                case 10: {
                    const double avg =
                        0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
                    const bool center_above = avg > level;
                    // connect the corners that match the center classification
                    const bool pair_bl_tr = (code == 5) == center_above;
                    if (pair_bl_tr) {
                        emit(kb, interp_h(i, j), kr, interp_v(i + 1, j));
                        emit(kt, interp_h(i, j + 1), kl, interp_v(i, j));
                    } else {
                        emit(kb, interp_h(i, j), kl, interp_v(i, j));
                        emit(kt, interp_h(i, j + 1), kr, interp_v(i + 1, j));
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // Stitch segments into chains by shared edge keys.
    std::unordered_map<std::int64_t, std::vector<std::size_t>> by_edge;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        by_edge[segments[s].a].push_back(s);
        by_edge[segments[s].b].push_back(s);
    }

    std::vector<ContourChain> chains;
    std::vector<std::uint8_t> used(segments.size(), 0);

    const auto walk = [&](std::size_t seed, std::int64_t start_key) {
        std::vector<std::int64_t> keys;
        keys.push_back(start_key);
        std::size_t cur = seed;
        std::int64_t cur_key = start_key;
        for (;;) {
            used[cur] = 1;
            const std::int64_t next_key =
                (segments[cur].a == cur_key) ? segments[cur].b : segments[cur].a;
            keys.push_back(next_key);
            std::size_t next_seg = static_cast<std::size_t>(-1);
            for (std::size_t cand : by_edge[next_key]) {
                if (!used[cand]) {
                    next_seg = cand;
                    break;
                }
            }
            if (next_seg == static_cast<std::size_t>(-1)) break;
            cur = next_seg;
            cur_key = next_key;
        }
        return keys;
    };

    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        // try to start from a free end so open chains come out whole
        std::int64_t start = segments[s].a;
        auto forward = walk(s, start);
        if (forward.front() != forward.back()) {
            // may have started mid-chain: extend backwards from the start key
            std::size_t tail_seg = static_cast<std::size_t>(-1);
            for (std::size_t cand : by_edge[forward.front()]) {
                if (!used[cand]) {
                    tail_seg = cand;
                    break;
                }
            }
            if (tail_seg != static_cast<std::size_t>(-1)) {
                auto backward = walk(tail_seg, forward.front());
                std::vector<std::int64_t> merged(backward.rbegin(), backward.rend());
                merged.insert(merged.end(), forward.begin() + 1, forward.end());
                forward = std::move(merged);
            }
        }
        ContourChain chain;
        chain.closed = forward.size() > 2 && forward.front() == forward.back();
        if (chain.closed) forward.pop_back();
        chain.vertices.reserve(forward.size());
        for (std::int64_t k : forward) chain.vertices.push_back(edge_point.at(k));
        chains.push_back(std::move(chain));
    }
    return chains;
}

}  // namespace homerange::detail
