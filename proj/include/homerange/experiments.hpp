#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "homerange/bounds.hpp"
#include "homerange/detail/parallel.hpp"
#include "homerange/geometry.hpp"
#include "homerange/grid.hpp"
#include "homerange/setestim.hpp"
#include "homerange/simulator.hpp"

namespace homerange {

inline std::pair<double, double> summarize(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty value list");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median =
        (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return {mean, median};
}

// Simulation-study setup shared by every cell of a table run.
struct StudySetup {
    Domain domain = make_study_domain();
    Drift drift = make_radial_ou_drift();
    Vec2 start{0.0, -0.5};
};

struct ExperimentGrid {
    std::vector<double> h_values{0.001, 0.002, 0.003};
    std::vector<std::int64_t> delta1_steps{100, 250, 500};
    std::vector<std::int64_t> delta2_steps{100, 250, 500};
    std::int64_t n_steps = 100000;
    int reps = 50;
    double r = 0.4;
    std::uint64_t master_seed = 20240901;
    double raster_spacing = 0.005;  // rasterized S for Hausdorff metrics
    double hull_spacing = 0.005;    // hull mask grid (measure metrics)
    int hull_center_divisor = 4;
};

inline void validate(const ExperimentGrid& g) {
    if (g.h_values.empty() || g.delta1_steps.empty() || g.delta2_steps.empty()) {
        throw std::invalid_argument("ExperimentGrid: parameter lists must be non-empty");
    }
    if (g.reps < 1) throw std::invalid_argument("ExperimentGrid: reps must be >= 1");
    if (g.n_steps < 1) throw std::invalid_argument("ExperimentGrid: n_steps must be >= 1");
    for (double h : g.h_values) {
        if (!(h > 0.0)) throw std::invalid_argument("ExperimentGrid: h must be > 0");
    }
    for (std::int64_t d1 : g.delta1_steps) {
        if (d1 < 1) throw std::invalid_argument("ExperimentGrid: delta1 must be >= 1");
        if (d1 > g.n_steps) {
            throw std::invalid_argument("ExperimentGrid: delta1 exceeds n_steps; no window fits");
        }
    }
    for (std::int64_t d2 : g.delta2_steps) {
        if (d2 < 0) throw std::invalid_argument("ExperimentGrid: delta2 must be >= 0");
    }
}

// Number of complete ON windows fitting the step budget: the largest p with
// p*d1 + (p-1)*d2 <= n_steps. Table runs simulate exactly that many steps so
// the path ends inside an ON window.
inline std::int64_t window_count(std::int64_t n_steps, std::int64_t d1, std::int64_t d2) {
    const std::int64_t p = (n_steps + d2) / (d1 + d2);
    return std::max<std::int64_t>(p, 0);
}

inline std::int64_t scheduled_sim_steps(std::int64_t p, std::int64_t d1, std::int64_t d2) {
    return p * d1 + (p - 1) * d2;
}

struct CellStats {
    std::vector<double> raw;  // per-replicate values, kept for audit
    double mean = 0.0;
    double median = 0.0;
    int failures = 0;
    bool defined = true;
};

struct ResultTable {
    std::string metric;
    std::vector<double> h_values;
    std::vector<std::int64_t> delta1_steps;
    std::vector<std::int64_t> delta2_steps;
    std::vector<CellStats> cells;  // h-major, then delta1, then delta2

    std::size_t index(std::size_t ih, std::size_t i1, std::size_t i2) const {
        return (ih * delta1_steps.size() + i1) * delta2_steps.size() + i2;
    }
    const CellStats& cell(std::size_t ih, std::size_t i1, std::size_t i2) const {
        return cells[index(ih, i1, i2)];
    }
};

struct TablePair {
    ResultTable onoff;
    ResultTable contiguous;
};

namespace detail {

inline ResultTable empty_table(const ExperimentGrid& grid, std::string metric) {
    ResultTable t;
    t.metric = std::move(metric);
    t.h_values = grid.h_values;
    t.delta1_steps = grid.delta1_steps;
    t.delta2_steps = grid.delta2_steps;
    t.cells.resize(grid.h_values.size() * grid.delta1_steps.size() * grid.delta2_steps.size());
    return t;
}

inline void finalize_cell(CellStats& cell) {
    if (cell.raw.empty()) {
        cell.defined = false;
        return;
    }
    const auto [mean, median] = summarize(cell.raw);
    cell.mean = mean;
    cell.median = median;
}

// Shared per-replicate paths: simulate once, split into the on-off subset
// and the contiguous prefix of the same length p*delta1.
struct PairedSample {
    std::vector<Vec2> onoff;
    std::vector<Vec2> contiguous;
};

inline PairedSample paired_sample(const StudySetup& setup, double h, std::int64_t d1,
                                  std::int64_t d2, std::int64_t n_steps, std::uint64_t seed) {
    const std::int64_t p = window_count(n_steps, d1, d2);
    if (p < 1) throw std::invalid_argument("paired_sample: no complete ON window fits n_steps");
    SimParams params;
    params.domain = setup.domain;
    params.drift = setup.drift;
    params.start = setup.start;
    params.h = h;
    params.n_steps = scheduled_sim_steps(p, d1, d2);
    params.seed = seed;
    const Trajectory traj = simulate(params);
    const OnOffSchedule sched{d1, d2, h};
    PairedSample out;
    out.onoff = apply_schedule(traj, sched).points;
    out.contiguous = prefix_window(traj, p * d1).points;
    return out;
}

inline void enforce_failure_policy(const ResultTable& t, int reps) {
    std::int64_t failures = 0;
    for (const auto& c : t.cells) failures += c.failures;
    const std::int64_t total = static_cast<std::int64_t>(t.cells.size()) * reps;
    if (failures * 20 > total) {  // > 5%
        throw std::runtime_error("experiment run failed: " + std::to_string(failures) + " of " +
                                 std::to_string(total) + " replicates failed (> 5%)");
    }
}

template <typename Metric>
TablePair run_paired_tables(const ExperimentGrid& grid, const StudySetup& setup,
                            std::string metric_on, std::string metric_contig, Metric&& metric,
                            int max_workers) {
    validate(grid);
    TablePair tables{empty_table(grid, std::move(metric_on)),
                     empty_table(grid, std::move(metric_contig))};

    const std::size_t n_cells = tables.onoff.cells.size();
    for (std::size_t cell_idx = 0; cell_idx < n_cells; ++cell_idx) {
        const std::size_t i2 = cell_idx % grid.delta2_steps.size();
        const std::size_t i1 = (cell_idx / grid.delta2_steps.size()) % grid.delta1_steps.size();
        const std::size_t ih = cell_idx / (grid.delta2_steps.size() * grid.delta1_steps.size());
        const double h = grid.h_values[ih];
        const std::int64_t d1 = grid.delta1_steps[i1];
        const std::int64_t d2 = grid.delta2_steps[i2];

        std::vector<double> on_vals(grid.reps, std::numeric_limits<double>::quiet_NaN());
        std::vector<double> contig_vals(grid.reps, std::numeric_limits<double>::quiet_NaN());
        homerange::detail::parallel_for(
            static_cast<std::size_t>(grid.reps),
            [&](std::size_t rep) {
                try {
                    const std::uint64_t seed = derive_seed(grid.master_seed, cell_idx, rep);
                    const PairedSample sample = paired_sample(setup, h, d1, d2, grid.n_steps, seed);
                    on_vals[rep] = metric(sample.onoff);
                    contig_vals[rep] = metric(sample.contiguous);
                } catch (const std::exception&) {
                    // recorded below as a failed replicate
                }
            },
            max_workers);

        CellStats& on_cell = tables.onoff.cells[cell_idx];
        CellStats& contig_cell = tables.contiguous.cells[cell_idx];
        for (int rep = 0; rep < grid.reps; ++rep) {
            if (std::isnan(on_vals[rep]) || std::isnan(contig_vals[rep])) {
                ++on_cell.failures;
                ++contig_cell.failures;
                continue;
            }
            on_cell.raw.push_back(on_vals[rep]);
            contig_cell.raw.push_back(contig_vals[rep]);
        }
        finalize_cell(on_cell);
        finalize_cell(contig_cell);
    }
    enforce_failure_policy(tables.onoff, grid.reps);
    return tables;
}

}  // namespace detail

// Tables of d_H(point set, rasterized S): on-off subset vs the contiguous
// prefix of the same path.
inline TablePair run_hausdorff_tables(const ExperimentGrid& grid,
                                      const StudySetup& setup = {}) {
    const RegionMask raster = rasterize(setup.domain, make_grid_covering(setup.domain.bbox,
                                                                         grid.raster_spacing));
    const std::vector<Vec2> raster_pts = mask_points(raster);
    return detail::run_paired_tables(
        grid, setup, "dH_onoff", "dH_contiguous",
        [&](const std::vector<Vec2>& pts) { return hausdorff(pts, raster_pts); }, 0);
}

// Tables of d_mu(C_r(point set), S) on the hull grid.
inline TablePair run_measure_tables(const ExperimentGrid& grid, const StudySetup& setup = {}) {
    validate(grid);
    const Grid2D hull_grid =
        make_grid_covering(setup.domain.bbox.dilated(2.0 * grid.r), grid.hull_spacing);
    const RegionMask raster_S = rasterize(setup.domain, hull_grid);
    return detail::run_paired_tables(
        grid, setup, "dmu_onoff", "dmu_contiguous",
        [&](const std::vector<Vec2>& pts) {
            const HullResult hull =
                rconvex_hull(PointCloud{pts}, grid.r, hull_grid, grid.hull_center_divisor);
            return distance_in_measure(hull.mask, raster_S);
        },
        2 /* hull transforms are memory-hungry */);
}

// Efficiency gain 1 - mean_onoff/mean_contiguous per cell (the table
// headline), with the 1 - median/median variant stored alongside.
inline ResultTable efficiency_gain(const ResultTable& onoff, const ResultTable& contiguous) {
    if (onoff.h_values != contiguous.h_values || onoff.delta1_steps != contiguous.delta1_steps ||
        onoff.delta2_steps != contiguous.delta2_steps) {
        throw std::invalid_argument("efficiency_gain: tables cover different grids");
    }
    ResultTable gain;
    gain.metric = onoff.metric.find("dmu") != std::string::npos ? "gain_dmu" : "gain_dH";
    gain.h_values = onoff.h_values;
    gain.delta1_steps = onoff.delta1_steps;
    gain.delta2_steps = onoff.delta2_steps;
    gain.cells.resize(onoff.cells.size());
    for (std::size_t k = 0; k < gain.cells.size(); ++k) {
        const CellStats& a = onoff.cells[k];
        const CellStats& b = contiguous.cells[k];
        CellStats& g = gain.cells[k];
        g.failures = std::max(a.failures, b.failures);
        if (!a.defined || !b.defined || b.mean == 0.0 || b.median == 0.0) {
            g.defined = false;
            continue;
        }
        g.mean = 1.0 - a.mean / b.mean;       // headline gain
        g.median = 1.0 - a.median / b.median; // auxiliary median-ratio variant
    }
    return gain;
}

// --- convergence diagnostic ---------------------------------------------------

struct ConvergenceConfig {
    StudySetup setup;
    double h = 0.01;
    std::int64_t delta1_steps = 250;
    std::int64_t delta2_steps = 500;
    double r = 0.4;
    double raster_spacing = 0.005;
    double hull_spacing = 0.005;
    int hull_center_divisor = 4;
    std::uint64_t master_seed = 7;
};

struct ConvergencePoint {
    std::int64_t steps = 0;
    double T_time = 0.0;
    double median_dH_points = 0.0;
    double median_dH_hull = 0.0;
    double median_dmu_hull = 0.0;
    double rate = 0.0;  // (log(T)^2 / T)^{1/d}, d = 2
};

inline std::vector<ConvergencePoint> run_convergence_diagnostic(
    const std::vector<std::int64_t>& T_steps, int reps, const ConvergenceConfig& cfg) {
    if (T_steps.empty()) throw std::invalid_argument("run_convergence_diagnostic: empty T list");
    if (reps < 1) throw std::invalid_argument("run_convergence_diagnostic: reps must be >= 1");
    for (std::size_t i = 1; i < T_steps.size(); ++i) {
        if (T_steps[i] <= T_steps[i - 1]) {
            throw std::invalid_argument("run_convergence_diagnostic: T list must increase");
        }
    }

    const RegionMask raster = rasterize(
        cfg.setup.domain, make_grid_covering(cfg.setup.domain.bbox, cfg.raster_spacing));
    const std::vector<Vec2> raster_pts = mask_points(raster);
    const Grid2D hull_grid =
        make_grid_covering(cfg.setup.domain.bbox.dilated(2.0 * cfg.r), cfg.hull_spacing);
    const RegionMask raster_on_hull_grid = rasterize(cfg.setup.domain, hull_grid);

    std::vector<ConvergencePoint> out;
    for (std::size_t ti = 0; ti < T_steps.size(); ++ti) {
        std::vector<double> dh_points, dh_hull, dmu_hull;
        for (int rep = 0; rep < reps; ++rep) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, ti, rep);
            const auto sample = detail::paired_sample(cfg.setup, cfg.h, cfg.delta1_steps,
                                                      cfg.delta2_steps, T_steps[ti], seed);
            dh_points.push_back(hausdorff(sample.onoff, raster_pts));
            const HullResult hull = rconvex_hull(PointCloud{sample.onoff}, cfg.r, hull_grid,
                                                 cfg.hull_center_divisor);
            dh_hull.push_back(hausdorff(mask_points(hull.mask), raster_pts));
            dmu_hull.push_back(distance_in_measure(hull.mask, raster_on_hull_grid));
        }
        ConvergencePoint pt;
        pt.steps = T_steps[ti];
        pt.T_time = static_cast<double>(T_steps[ti]) * cfg.h;
        pt.median_dH_points = summarize(dh_points).second;
        pt.median_dH_hull = summarize(dh_hull).second;
        pt.median_dmu_hull = summarize(dmu_hull).second;
        const double tt[1] = {pt.T_time};
        pt.rate = rate_curve(tt, 2).front();
        out.push_back(pt);
    }
    return out;
}

}  // namespace homerange
