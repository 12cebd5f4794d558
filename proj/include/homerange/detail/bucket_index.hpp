#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "homerange/geometry.hpp"

namespace homerange::detail {

// Uniform-bucket nearest-neighbour index with exact distances. Ring search
// expands outward from the query bucket and stops once the ring's lower
// bound cannot beat the best squared distance found so far.
class BucketIndex {
  public:
    explicit BucketIndex(const std::vector<Vec2>& points, double target_cell = 0.0)
        : pts_(points) {
        if (pts_.empty()) throw std::invalid_argument("BucketIndex: empty point set");
        box_ = Bbox::of_points(pts_);
        const double w = std::max(box_.width(), 1e-12);
        const double h = std::max(box_.height(), 1e-12);
        double cell = target_cell;
        if (!(cell > 0.0)) {
            // aim for a handful of points per bucket
            cell = std::sqrt(w * h / static_cast<double>(pts_.size())) * 2.0;
            cell = std::max(cell, 1e-9);
        }
        bx_ = std::max(1, std::min(4096, static_cast<int>(std::ceil(w / cell))));
        by_ = std::max(1, std::min(4096, static_cast<int>(std::ceil(h / cell))));
        cw_ = w / bx_;
        ch_ = h / by_;
        const std::size_t nb = static_cast<std::size_t>(bx_) * by_;
        std::vector<std::uint32_t> counts(nb + 1, 0);
        cell_of_.resize(pts_.size());
        for (std::size_t k = 0; k < pts_.size(); ++k) {
            cell_of_[k] = bucket_of(pts_[k]);
            ++counts[cell_of_[k] + 1];
        }
        for (std::size_t b = 1; b <= nb; ++b) counts[b] += counts[b - 1];
        starts_ = counts;
        order_.resize(pts_.size());
        std::vector<std::uint32_t> cursor(starts_.begin(), starts_.end() - 1);
        for (std::size_t k = 0; k < pts_.size(); ++k) {
            order_[cursor[cell_of_[k]]++] = static_cast<std::uint32_t>(k);
        }
    }

    // Squared distance to the nearest point, or +inf when nothing lies
    // within sqrt(cap_sq).
    double nearest_sq(Vec2 q, double cap_sq = std::numeric_limits<double>::infinity()) const {
        double best = std::numeric_limits<double>::infinity();
        const int qi = clampi(static_cast<int>(std::floor((q.x - box_.lo.x) / cw_)), bx_);
        const int qj = clampi(static_cast<int>(std::floor((q.y - box_.lo.y) / ch_)), by_);
        const int max_ring = std::max(bx_, by_);
        for (int ring = 0; ring <= max_ring; ++ring) {
            const double lb = ring_lower_bound(q, qi, qj, ring);
            if (lb * lb > best || lb * lb > cap_sq) break;
            scan_ring(q, qi, qj, ring, best);
        }
        return (best <= cap_sq) ? best : std::numeric_limits<double>::infinity();
    }

    double nearest(Vec2 q) const { return std::sqrt(nearest_sq(q)); }

    const Bbox& box() const { return box_; }

  private:
    static int clampi(int v, int n) { return std::clamp(v, 0, n - 1); }

    std::uint32_t bucket_of(Vec2 p) const {
        const int i = clampi(static_cast<int>(std::floor((p.x - box_.lo.x) / cw_)), bx_);
        const int j = clampi(static_cast<int>(std::floor((p.y - box_.lo.y) / ch_)), by_);
        return static_cast<std::uint32_t>(j) * bx_ + i;
    }

    // Distance from q to the nearest possible point in buckets at Chebyshev
    // ring `ring` around (qi, qj); 0 when no useful bound exists.
    double ring_lower_bound(Vec2 q, int qi, int qj, int ring) const {
        if (ring == 0) return 0.0;
        // inner box of the previous ring, in coordinates
        const double x0 = box_.lo.x + (qi - (ring - 1)) * cw_;
        const double x1 = box_.lo.x + (qi + ring) * cw_;
        const double y0 = box_.lo.y + (qj - (ring - 1)) * ch_;
        const double y1 = box_.lo.y + (qj + ring) * ch_;
        if (q.x < x0 || q.x > x1 || q.y < y0 || q.y > y1) return 0.0;
        const double m = std::min(std::min(q.x - x0, x1 - q.x), std::min(q.y - y0, y1 - q.y));
        return std::max(m, 0.0);
    }

    void scan_bucket(Vec2 q, int i, int j, double& best) const {
        const std::size_t b = static_cast<std::size_t>(j) * bx_ + i;
        for (std::uint32_t k = starts_[b]; k < starts_[b + 1]; ++k) {
            best = std::min(best, dist_sq(q, pts_[order_[k]]));
        }
    }

    void scan_ring(Vec2 q, int qi, int qj, int ring, double& best) const {
        const int i0 = qi - ring, i1 = qi + ring;
        const int j0 = qj - ring, j1 = qj + ring;
        if (ring == 0) {
            if (qi >= 0 && qi < bx_ && qj >= 0 && qj < by_) scan_bucket(q, qi, qj, best);
            return;
        }
        for (int i = std::max(i0, 0); i <= std::min(i1, bx_ - 1); ++i) {
            if (j0 >= 0) scan_bucket(q, i, j0, best);
            if (j1 < by_) scan_bucket(q, i, j1, best);
        }
        for (int j = std::max(j0 + 1, 0); j <= std::min(j1 - 1, by_ - 1); ++j) {
            if (i0 >= 0) scan_bucket(q, i0, j, best);
            if (i1 < bx_) scan_bucket(q, i1, j, best);
        }
    }

    std::vector<Vec2> pts_;
    Bbox box_;
    int bx_ = 1, by_ = 1;
    double cw_ = 1.0, ch_ = 1.0;
    std::vector<std::uint32_t> starts_;
    std::vector<std::uint32_t> order_;
    std::vector<std::uint32_t> cell_of_;
};

}  // namespace homerange::detail
