#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace homerange::detail {

// Exact Euclidean distance transform for point sites on a lattice, split in
// two passes so large lattices can stream the second pass instead of storing
// a full squared-distance field.
//
// Pass 1 stores, per cell, the column distance to the nearest site in the
// same row (kNoSite when the row is empty). Pass 2 runs the
// Felzenszwalb-Huttenlocher lower envelope per column over
// f(j) = rowdist(i,j)^2 and yields dist^2(i,j) in lattice units.

inline constexpr std::uint16_t kNoSite = std::numeric_limits<std::uint16_t>::max();

inline void edt_row_pass(const std::uint8_t* sites, int nx, int ny, std::uint16_t* rowdist) {
    if (nx >= kNoSite) throw std::invalid_argument("edt_row_pass: lattice too wide for uint16");
    for (int j = 0; j < ny; ++j) {
        const std::uint8_t* s = sites + static_cast<std::size_t>(j) * nx;
        std::uint16_t* rd = rowdist + static_cast<std::size_t>(j) * nx;
        int last = -1;
        for (int i = 0; i < nx; ++i) {
            if (s[i]) last = i;
            rd[i] = (last < 0) ? kNoSite : static_cast<std::uint16_t>(i - last);
        }
        last = -1;
        for (int i = nx - 1; i >= 0; --i) {
            if (s[i]) last = i;
            if (last >= 0) {
                const int d = last - i;
                if (d < rd[i]) rd[i] = static_cast<std::uint16_t>(d);
            }
        }
    }
}

// Evaluates the column-wise envelope at the rows requested by the consumer.
// Consumer signature: void(int i, int j, std::int64_t dist_sq); dist_sq is
// kInfDistSq where the whole lattice has no site.
inline constexpr std::int64_t kInfDistSq = std::numeric_limits<std::int64_t>::max();

template <typename RowFilter, typename Consumer>
void edt_column_pass(const std::uint16_t* rowdist, int nx, int ny, RowFilter&& want_row,
                     Consumer&& consume) {
    std::vector<int> v(ny);           // parabola anchors
    std::vector<double> z(ny + 1);    // envelope breakpoints
    std::vector<std::int64_t> f(ny);  // parabola offsets

    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nx; ++i) {
        int k = -1;
        for (int j = 0; j < ny; ++j) {
            const std::uint16_t rd = rowdist[static_cast<std::size_t>(j) * nx + i];
            if (rd == kNoSite) continue;
            const std::int64_t fj = static_cast<std::int64_t>(rd) * rd;
            double s = 0.0;
            while (k >= 0) {
                s = (static_cast<double>(fj + static_cast<std::int64_t>(j) * j) -
                     static_cast<double>(f[k] + static_cast<std::int64_t>(v[k]) * v[k])) /
                    (2.0 * (j - v[k]));
                if (s > z[k]) break;
                --k;
            }
            ++k;
            v[k] = j;
            f[k] = fj;
            z[k] = (k == 0) ? -kInf : s;
            z[k + 1] = kInf;
        }
        if (k < 0) {
            for (int j = 0; j < ny; ++j) {
                if (want_row(j)) consume(i, j, kInfDistSq);
            }
            continue;
        }
        z[k + 1] = kInf;
        int idx = 0;
        for (int j = 0; j < ny; ++j) {
            if (!want_row(j)) continue;
            while (z[idx + 1] < j) ++idx;
            const std::int64_t dj = j - v[idx];
            consume(i, j, dj * dj + f[idx]);
        }
    }
}

// Convenience full-field transform for moderate lattices: squared distance
// in lattice units from every cell to the nearest site cell.
inline std::vector<std::int64_t> edt_squared(const std::vector<std::uint8_t>& sites, int nx,
                                             int ny) {
    if (static_cast<std::size_t>(nx) * ny != sites.size()) {
        throw std::invalid_argument("edt_squared: size mismatch");
    }
    std::vector<std::uint16_t> rowdist(sites.size());
    edt_row_pass(sites.data(), nx, ny, rowdist.data());
    std::vector<std::int64_t> out(sites.size(), kInfDistSq);
    edt_column_pass(
        rowdist.data(), nx, ny, [](int) { return true; },
        [&](int i, int j, std::int64_t d) { out[static_cast<std::size_t>(j) * nx + i] = d; });
    return out;
}

}  // namespace homerange::detail
