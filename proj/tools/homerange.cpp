// homerange: simulation and estimation toolkit for home-range estimation
// from duty-cycled reflected diffusions.
//
// Subcommands: simulate, schedule, hull, distances, density, levelsets,
// drift, bounds, advise, experiment, ingest. Exit codes: 0 success,
// 1 validation error, 2 runtime failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homerange/bounds.hpp"
#include "homerange/density.hpp"
#include "homerange/experiments.hpp"
#include "homerange/geometry.hpp"
#include "homerange/grid.hpp"
#include "homerange/io.hpp"
#include "homerange/setestim.hpp"
#include "homerange/simulator.hpp"
#include "homerange/version.hpp"

namespace fs = std::filesystem;
using namespace homerange;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<std::int64_t> steps;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration");
    cmd->add_option("--out", opts.out, "output directory (default HOMERANGE_OUT or ./out)");
    cmd->add_option("--seed", opts.seed, "override RNG seed");
    cmd->add_option("--reps", opts.reps, "override replication count");
    cmd->add_option("--steps", opts.steps, "override step count");
}

io::RunConfig load_or_default(const CommonOpts& opts) {
    io::RunConfig cfg;
    if (!opts.config_path.empty()) cfg = io::load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.steps) {
        cfg.n_steps = *opts.steps;
        cfg.experiment.n_steps = *opts.steps;
    }
    if (opts.reps) cfg.experiment.reps = *opts.reps;
    return cfg;
}

fs::path out_dir(const CommonOpts& opts, const io::RunConfig& cfg) {
    if (!opts.out.empty()) return opts.out;
    if (const char* env = std::getenv("HOMERANGE_OUT")) {
        if (*env) return env;
    }
    return cfg.out_dir;
}

double wall_seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json base_manifest(const char* command, const io::RunConfig& cfg) {
    return json{{"command", command},
                {"version", kVersion},
                {"rng", kRngTag},
                {"domain", io::domain_json(cfg.domain)}};
}

SimParams sim_params_of(const io::RunConfig& cfg) {
    SimParams p;
    p.domain = cfg.domain;
    p.h = cfg.h;
    p.n_steps = cfg.n_steps;
    p.start = cfg.start;
    p.drift = make_drift_by_name(cfg.drift_name);
    p.seed = cfg.seed;
    return p;
}

// Inputs that may be a trajectory CSV or a mask bitmap; masks start "grid ".
bool is_mask_file(const fs::path& path) {
    auto in = io::detail::open_in(path);
    std::string tag;
    in >> tag;
    return tag == "grid";
}

std::vector<Vec2> on_points(const Trajectory& traj) {
    std::vector<Vec2> pts;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.on[k]) pts.push_back(traj.points[k]);
    }
    return pts;
}

Grid2D hull_grid_for(const std::vector<Vec2>& pts, double r, double spacing) {
    return make_grid_covering(Bbox::of_points(pts).dilated(2.0 * r), spacing);
}

int cmd_simulate(const CommonOpts& opts) {
    const auto start = std::chrono::steady_clock::now();
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);
    const Trajectory traj = simulate(sim_params_of(cfg));
    io::write_trajectory_csv(traj, dir / "trajectory.csv");
    json manifest = base_manifest("simulate", cfg);
    manifest["seed"] = cfg.seed;
    manifest["h"] = cfg.h;
    manifest["n_steps"] = cfg.n_steps;
    manifest["drift"] = cfg.drift_name;
    manifest["rejected_steps"] = traj.meta.rejected_steps;
    manifest["wall_seconds"] = wall_seconds_since(start);
    manifest["outputs"] = {(dir / "trajectory.csv").string()};
    io::write_json(manifest, dir / "manifest.json");
    std::cout << "simulate: n=" << traj.size() << " h=" << cfg.h << " seed=" << cfg.seed
              << " rejected=" << traj.meta.rejected_steps << " -> "
              << (dir / "trajectory.csv").string() << "\n";
    return 0;
}

int cmd_schedule(const CommonOpts& opts, const std::string& in,
                 std::optional<std::int64_t> d1_flag, std::optional<std::int64_t> d2_flag,
                 std::optional<std::int64_t> endpoints) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);
    Trajectory traj = io::read_trajectory_csv(in);
    OnOffSchedule sched{d1_flag.value_or(cfg.delta1_steps), d2_flag.value_or(cfg.delta2_steps),
                        traj.meta.h > 0 ? traj.meta.h : cfg.h};
    const Trajectory kept = apply_schedule(traj, sched);
    io::write_trajectory_csv(kept, dir / "onoff.csv");
    std::string extra;
    if (endpoints) {
        const auto pts = endpoint_subsample(traj, sched, *endpoints);
        std::vector<std::vector<Vec2>> one{pts};
        io::write_polylines_csv(one, dir / "endpoints.csv");
        extra = " endpoints=" + std::to_string(pts.size());
    }
    std::cout << "schedule: kept " << kept.size() << " of " << traj.size() << " (delta1="
              << sched.delta1_steps << ", delta2=" << sched.delta2_steps << ")" << extra
              << " -> " << (dir / "onoff.csv").string() << "\n";
    return 0;
}

int cmd_hull(const CommonOpts& opts, const std::string& in, std::optional<double> r_flag) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);
    const Trajectory traj = io::read_trajectory_csv(in);
    const std::vector<Vec2> pts = on_points(traj);
    const double r = r_flag.value_or(cfg.r);
    const Grid2D grid = hull_grid_for(pts, r, cfg.hull_spacing);
    const HullResult hull = rconvex_hull(PointCloud{pts}, r, grid, cfg.hull_center_divisor);
    io::write_mask(hull.mask, dir / "hull_mask.txt");
    io::write_polylines_csv(hull.boundary, dir / "hull_boundary.csv");
    io::write_svg_polylines(hull.boundary, dir / "hull.svg");
    std::cout << "hull: r=" << r << " points=" << pts.size() << " area=" << measure(hull.mask)
              << " loops=" << hull.boundary.size() << " -> " << (dir / "hull_mask.txt").string()
              << "\n";
    return 0;
}

int cmd_distances(const CommonOpts& opts, const std::string& a_path, const std::string& b_path,
                  bool against_domain) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);

    std::optional<RegionMask> mask_a;
    std::vector<Vec2> pts_a;
    if (is_mask_file(a_path)) {
        mask_a = io::read_mask(a_path);
        pts_a = mask_points(*mask_a);
    } else {
        pts_a = on_points(io::read_trajectory_csv(a_path));
    }

    std::optional<RegionMask> mask_b;
    std::vector<Vec2> pts_b;
    std::string b_name = b_path;
    if (against_domain) {
        const Grid2D grid = mask_a ? mask_a->grid
                                   : make_grid_covering(cfg.domain.bbox, cfg.grid_spacing);
        mask_b = rasterize(cfg.domain, grid);
        pts_b = mask_points(*mask_b);
        b_name = "domain:" + cfg.domain.name;
    } else if (is_mask_file(b_path)) {
        mask_b = io::read_mask(b_path);
        pts_b = mask_points(*mask_b);
    } else {
        pts_b = on_points(io::read_trajectory_csv(b_path));
    }

    const double dh = hausdorff(pts_a, pts_b);
    json result{{"a", a_path}, {"b", b_name}, {"hausdorff", dh}};
    std::string dmu_text = "NA";
    if (mask_a && mask_b && mask_a->grid == mask_b->grid) {
        const double dmu = distance_in_measure(*mask_a, *mask_b);
        result["distance_in_measure"] = dmu;
        dmu_text = io::fmt_g17(dmu);
    }
    io::write_json(result, dir / "distances.json");
    std::cout << "distances: dH=" << dh << " dmu=" << dmu_text << " -> "
              << (dir / "distances.json").string() << "\n";
    return 0;
}

KernelSpec kernel_of(const io::RunConfig& cfg) {
    return {cfg.kernel == "epanechnikov" ? KernelFamily::epanechnikov : KernelFamily::gaussian,
            cfg.bandwidth};
}

int cmd_density(const CommonOpts& opts, const std::string& in, std::optional<double> bw_flag,
                std::optional<double> spacing_flag) {
    io::RunConfig cfg = load_or_default(opts);
    if (bw_flag) cfg.bandwidth = *bw_flag;
    if (spacing_flag) cfg.grid_spacing = *spacing_flag;
    const fs::path dir = out_dir(opts, cfg);
    const std::vector<Vec2> pts = on_points(io::read_trajectory_csv(in));
    if (pts.empty()) throw std::invalid_argument("density: no ON points in input");
    const Grid2D grid =
        make_grid_covering(Bbox::of_points(pts).dilated(6.0 * cfg.bandwidth), cfg.grid_spacing);
    const DensityField field = kde(pts, kernel_of(cfg), grid);
    io::write_density_csv(field, dir / "density.csv");
    io::write_svg_density(field, dir / "density.svg");
    std::cout << "density: n=" << pts.size() << " bandwidth=" << cfg.bandwidth
              << " mass=" << field.mass() << " max=" << field.max_value() << " -> "
              << (dir / "density.csv").string() << "\n";
    return 0;
}

int cmd_levelsets(const CommonOpts& opts, const std::string& in, bool use_true_density,
                  std::vector<double> lambda_flags) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);

    DensityField field;
    if (use_true_density) {
        field = true_density(cfg.domain, "quadratic",
                             make_grid_covering(cfg.domain.bbox, cfg.grid_spacing));
    } else {
        if (in.empty()) {
            throw std::invalid_argument("levelsets: need --in trajectory or --true");
        }
        const std::vector<Vec2> pts = on_points(io::read_trajectory_csv(in));
        const Grid2D grid = make_grid_covering(Bbox::of_points(pts).dilated(6.0 * cfg.bandwidth),
                                               cfg.grid_spacing);
        field = kde(pts, kernel_of(cfg), grid);
    }

    std::vector<double> levels = !lambda_flags.empty() ? lambda_flags : cfg.lambdas;
    if (levels.empty()) {
        for (double q : cfg.mass_quantiles) levels.push_back(mass_quantile_level(field, q));
    }

    json index = json::array();
    std::vector<std::vector<Vec2>> all;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto contours = level_set_contours(field, levels[k]);
        const fs::path csv = dir / ("contours_" + std::to_string(k) + ".csv");
        io::write_polylines_csv(contours, csv);
        index.push_back({{"lambda", levels[k]},
                         {"area", measure(level_region(field, levels[k]))},
                         {"loops", contours.size()},
                         {"csv", csv.string()}});
        all.insert(all.end(), contours.begin(), contours.end());
    }
    io::write_json(json{{"levels", index}}, dir / "levels.json");
    if (!all.empty()) io::write_svg_polylines(all, dir / "levelsets.svg");
    std::cout << "levelsets: " << levels.size() << " level(s), " << all.size() << " loop(s) -> "
              << (dir / "levels.json").string() << "\n";
    return 0;
}

int cmd_drift(const CommonOpts& opts, const std::string& in, bool use_true_density,
              std::vector<std::string> at_flags) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);

    DensityField field;
    if (use_true_density) {
        field = true_density(cfg.domain, "quadratic",
                             make_grid_covering(cfg.domain.bbox, cfg.grid_spacing));
    } else {
        if (in.empty()) throw std::invalid_argument("drift: need --in trajectory or --true");
        const std::vector<Vec2> pts = on_points(io::read_trajectory_csv(in));
        const Grid2D grid = make_grid_covering(Bbox::of_points(pts).dilated(6.0 * cfg.bandwidth),
                                               cfg.grid_spacing);
        field = kde(pts, kernel_of(cfg), grid);
    }

    std::vector<Vec2> probes;
    for (const std::string& s : at_flags) {
        const auto comma = s.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("drift: --at expects 'x,y', got '" + s + "'");
        }
        probes.push_back({std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))});
    }
    if (probes.empty()) {
        // default probe lattice over the central part of the field
        const Grid2D& g = field.grid;
        for (int qj = 1; qj <= 5; ++qj) {
            for (int qi = 1; qi <= 5; ++qi) {
                probes.push_back(g.center(qi * g.nx / 6, qj * g.ny / 6));
            }
        }
    }

    auto out = io::detail::open_out(dir / "drift.csv");
    out << "x,y,nu_x,nu_y\n";
    std::size_t ok = 0;
    double mean_mag = 0.0;
    for (Vec2 p : probes) {
        try {
            const Vec2 nu = drift_estimate(field, p);
            out << io::fmt_g17(p.x) << ',' << io::fmt_g17(p.y) << ',' << io::fmt_g17(nu.x) << ','
                << io::fmt_g17(nu.y) << "\n";
            mean_mag += norm(nu);
            ++ok;
        } catch (const std::invalid_argument&) {
            out << io::fmt_g17(p.x) << ',' << io::fmt_g17(p.y) << ",NA,NA\n";
        }
    }
    std::cout << "drift: " << ok << "/" << probes.size() << " probes, mean |nu|="
              << (ok ? mean_mag / static_cast<double>(ok) : 0.0) << " -> "
              << (dir / "drift.csv").string() << "\n";
    return 0;
}

int cmd_bounds(const CommonOpts& opts, double epsilon, std::int64_t p, double delta1,
               double delta2, double alpha, double beta, double c_inf, double mu_S, int d) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);
    const ErgodicityParams params{alpha, beta, c_inf, mu_S, d};
    const BoundReport report = make_bound_report(epsilon, p, delta1, delta2, params);
    io::write_json(io::bound_report_json(report), dir / "bounds.json");
    std::cout << "bounds: onoff_raw=" << report.bound_onoff_raw
              << " contiguous_raw=" << report.bound_contiguous_raw
              << " feasible=" << (report.feasible ? "yes" : "no") << " -> "
              << (dir / "bounds.json").string() << "\n";
    return 0;
}

int cmd_advise(const CommonOpts& opts, double battery, double epsilon, double delta2,
               double alpha, double beta, double c_inf, double mu_S, int d,
               std::int64_t p_max) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);
    const ErgodicityParams params{alpha, beta, c_inf, mu_S, d};
    const ScheduleAdvice advice = advise_schedule(battery, epsilon, params, p_max, delta2);
    json j{{"battery", battery},
           {"epsilon", epsilon},
           {"delta1", advice.delta1},
           {"p", advice.p},
           {"delta2", delta2}};
    std::string bound_text = "NA";
    if (advice.bound) {
        j["bound_onoff_raw"] = advice.bound->raw;
        j["bound_onoff"] = advice.bound->clamped;
        bound_text = io::fmt_g17(advice.bound->raw);
    }
    io::write_json(j, dir / "advise.json");
    std::cout << "advise: p=" << advice.p << " delta1=" << advice.delta1
              << " bound_onoff_raw=" << bound_text << " -> " << (dir / "advise.json").string()
              << "\n";
    return 0;
}

int cmd_experiment(const CommonOpts& opts, const std::string& table, bool full,
                   const std::vector<std::int64_t>& convergence_T) {
    const auto start = std::chrono::steady_clock::now();
    io::RunConfig cfg = load_or_default(opts);
    if (full) {
        cfg.experiment = ExperimentGrid{};  // canonical 27-cell, 50-rep, 1e5-step grid
        if (opts.reps) cfg.experiment.reps = *opts.reps;
        if (opts.steps) cfg.experiment.n_steps = *opts.steps;
    }
    const fs::path dir = out_dir(opts, cfg);
    const StudySetup setup{cfg.domain, make_drift_by_name(cfg.drift_name), cfg.start};

    if (!convergence_T.empty()) {
        ConvergenceConfig ccfg;
        ccfg.setup = setup;
        ccfg.h = cfg.h;
        ccfg.delta1_steps = cfg.delta1_steps;
        ccfg.delta2_steps = cfg.delta2_steps;
        ccfg.r = cfg.experiment.r;
        ccfg.raster_spacing = cfg.experiment.raster_spacing;
        ccfg.hull_spacing = cfg.experiment.hull_spacing;
        ccfg.hull_center_divisor = cfg.experiment.hull_center_divisor;
        ccfg.master_seed = cfg.experiment.master_seed;
        const int reps = opts.reps.value_or(10);
        const auto curve = run_convergence_diagnostic(convergence_T, reps, ccfg);
        auto out = io::detail::open_out(dir / "convergence.csv");
        out << "steps,T,median_dH_points,median_dH_hull,median_dmu_hull,rate\n";
        json rows = json::array();
        for (const auto& pt : curve) {
            out << pt.steps << ',' << io::fmt_g17(pt.T_time) << ','
                << io::fmt_g17(pt.median_dH_points) << ',' << io::fmt_g17(pt.median_dH_hull)
                << ',' << io::fmt_g17(pt.median_dmu_hull) << ',' << io::fmt_g17(pt.rate) << "\n";
            rows.push_back({{"steps", pt.steps},
                            {"T", pt.T_time},
                            {"median_dH_points", pt.median_dH_points},
                            {"median_dH_hull", pt.median_dH_hull},
                            {"median_dmu_hull", pt.median_dmu_hull},
                            {"rate", pt.rate}});
        }
        io::write_json(json{{"reps", reps}, {"points", rows}}, dir / "convergence.json");
        std::cout << "experiment: convergence diagnostic over " << curve.size()
                  << " T value(s), reps=" << reps << " -> " << (dir / "convergence.csv").string()
                  << "\n";
        return 0;
    }

    json manifest = base_manifest("experiment", cfg);
    manifest["mode"] = full ? "full" : "desk";
    manifest["table"] = table;
    manifest["master_seed"] = cfg.experiment.master_seed;
    manifest["reps"] = cfg.experiment.reps;
    manifest["n_steps"] = cfg.experiment.n_steps;
    manifest["h_values"] = cfg.experiment.h_values;
    manifest["delta1_steps"] = cfg.experiment.delta1_steps;
    manifest["delta2_steps"] = cfg.experiment.delta2_steps;
    manifest["cells"] = cfg.experiment.h_values.size() * cfg.experiment.delta1_steps.size() *
                        cfg.experiment.delta2_steps.size();
    manifest["r"] = cfg.experiment.r;
    manifest["raster_spacing"] = cfg.experiment.raster_spacing;
    manifest["hull_spacing"] = cfg.experiment.hull_spacing;
    manifest["hull_center_divisor"] = cfg.experiment.hull_center_divisor;
    std::vector<std::string> outputs;

    const auto emit = [&](const ResultTable& t, const std::string& stem) {
        io::write_table_csv(t, dir / (stem + ".csv"));
        io::write_json(io::table_json(t), dir / (stem + ".json"));
        outputs.push_back((dir / (stem + ".csv")).string());
        outputs.push_back((dir / (stem + ".json")).string());
    };

    if (table == "hausdorff" || table == "both") {
        const TablePair tables = run_hausdorff_tables(cfg.experiment, setup);
        emit(tables.onoff, "dH_onoff");
        emit(tables.contiguous, "dH_contiguous");
        emit(efficiency_gain(tables.onoff, tables.contiguous), "gain_dH");
    }
    if (table == "measure" || table == "both") {
        const TablePair tables = run_measure_tables(cfg.experiment, setup);
        emit(tables.onoff, "dmu_onoff");
        emit(tables.contiguous, "dmu_contiguous");
        emit(efficiency_gain(tables.onoff, tables.contiguous), "gain_dmu");
    }

    manifest["outputs"] = outputs;
    manifest["wall_seconds"] = wall_seconds_since(start);
    io::write_json(manifest, dir / "manifest.json");
    std::cout << "experiment: table=" << table << " cells=" << manifest["cells"]
              << " reps=" << cfg.experiment.reps << " wall=" << manifest["wall_seconds"]
              << "s -> " << (dir / "manifest.json").string() << "\n";
    return 0;
}

int cmd_ingest(const CommonOpts& opts, const std::string& in, bool rescale) {
    const io::RunConfig cfg = load_or_default(opts);
    const fs::path dir = out_dir(opts, cfg);
    Trajectory traj = io::ingest_track(in);
    std::string note;
    if (rescale || cfg.rescale_unit_diameter) {
        const auto transform = io::rescale_to_unit_diameter(traj.points);
        note = " rescaled(scale=" + io::fmt_g17(transform.scale) + ")";
    }
    io::write_trajectory_csv(traj, dir / "ingested.csv");
    const Bbox box = Bbox::of_points(traj.points);
    std::cout << "ingest: " << traj.size() << " records, bbox [" << box.lo.x << "," << box.hi.x
              << "]x[" << box.lo.y << "," << box.hi.y << "]" << note << " -> "
              << (dir / "ingested.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"home-range estimation toolkit for duty-cycled reflected diffusions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts opts;

    auto* sim = app.add_subcommand("simulate", "simulate a reflected diffusion path");
    add_common(sim, opts);

    auto* sched = app.add_subcommand("schedule", "apply an on-off schedule to a trajectory");
    add_common(sched, opts);
    std::string sched_in;
    std::optional<std::int64_t> sched_d1, sched_d2, sched_endpoints;
    sched->add_option("--in", sched_in, "trajectory CSV")->required();
    sched->add_option("--delta1", sched_d1, "ON window length in steps");
    sched->add_option("--delta2", sched_d2, "OFF window length in steps");
    sched->add_option("--endpoints", sched_endpoints, "also emit the first n ON-window endpoints");

    auto* hull = app.add_subcommand("hull", "r-convex hull of a trajectory's ON points");
    add_common(hull, opts);
    std::string hull_in;
    std::optional<double> hull_r;
    hull->add_option("--in", hull_in, "trajectory CSV")->required();
    hull->add_option("--r", hull_r, "hull radius");

    auto* dist = app.add_subcommand("distances", "Hausdorff / measure distance between sets");
    add_common(dist, opts);
    std::string dist_a, dist_b;
    bool dist_against_domain = false;
    dist->add_option("--a", dist_a, "trajectory CSV or mask bitmap")->required();
    dist->add_option("--b", dist_b, "trajectory CSV or mask bitmap");
    dist->add_flag("--against-domain", dist_against_domain, "compare --a with the config domain");

    auto* dens = app.add_subcommand("density", "kernel density estimate of ON points");
    add_common(dens, opts);
    std::string dens_in;
    std::optional<double> dens_bw, dens_spacing;
    dens->add_option("--in", dens_in, "trajectory CSV")->required();
    dens->add_option("--bandwidth", dens_bw, "kernel bandwidth");
    dens->add_option("--spacing", dens_spacing, "evaluation grid spacing");

    auto* levels = app.add_subcommand("levelsets", "level-set contours of a density");
    add_common(levels, opts);
    std::string levels_in;
    bool levels_true = false;
    std::vector<double> levels_lambda;
    levels->add_option("--in", levels_in, "trajectory CSV (KDE input)");
    levels->add_flag("--true", levels_true, "use the true stationary density of the domain");
    levels->add_option("--lambda", levels_lambda, "explicit level values");

    auto* drift = app.add_subcommand("drift", "plug-in drift estimate from a density");
    add_common(drift, opts);
    std::string drift_in;
    bool drift_true = false;
    std::vector<std::string> drift_at;
    drift->add_option("--in", drift_in, "trajectory CSV (KDE input)");
    drift->add_flag("--true", drift_true, "use the true stationary density of the domain");
    drift->add_option("--at", drift_at, "probe point 'x,y' (repeatable)");

    auto* bounds_cmd = app.add_subcommand("bounds", "tail-bound report");
    add_common(bounds_cmd, opts);
    double b_eps = 1.0, b_delta1 = 0.0, b_delta2 = 0.0, b_alpha = 1.0, b_beta = 1.0,
           b_c = 1.0, b_mu = 1.0;
    std::int64_t b_p = 1;
    int b_d = 2;
    bounds_cmd->add_option("--epsilon", b_eps, "accuracy epsilon")->required();
    bounds_cmd->add_option("--p", b_p, "number of ON windows")->required();
    bounds_cmd->add_option("--delta1", b_delta1, "ON window length (time units)")->required();
    bounds_cmd->add_option("--delta2", b_delta2, "OFF window length (time units)");
    bounds_cmd->add_option("--alpha", b_alpha, "mixing exponent");
    bounds_cmd->add_option("--beta", b_beta, "mixing prefactor");
    bounds_cmd->add_option("--c", b_c, "inf of the stationary density");
    bounds_cmd->add_option("--muS", b_mu, "Lebesgue measure of S");
    bounds_cmd->add_option("--d", b_d, "dimension");

    auto* advise = app.add_subcommand("advise", "battery-constrained schedule advice");
    add_common(advise, opts);
    double a_batt = 0.0, a_eps = 1.0, a_delta2 = 0.0, a_alpha = 1.0, a_beta = 1.0, a_c = 1.0,
           a_mu = 1.0;
    std::int64_t a_pmax = 1000;
    int a_d = 2;
    advise->add_option("--battery", a_batt, "total ON time budget")->required();
    advise->add_option("--epsilon", a_eps, "accuracy epsilon")->required();
    advise->add_option("--delta2", a_delta2, "OFF window length (time units)");
    advise->add_option("--alpha", a_alpha, "mixing exponent");
    advise->add_option("--beta", a_beta, "mixing prefactor");
    advise->add_option("--c", a_c, "inf of the stationary density");
    advise->add_option("--muS", a_mu, "Lebesgue measure of S");
    advise->add_option("--d", a_d, "dimension");
    advise->add_option("--p-max", a_pmax, "largest admissible p");

    auto* exp = app.add_subcommand("experiment", "replication tables");
    add_common(exp, opts);
    std::string exp_table = "both";
    bool exp_full = false;
    std::vector<std::int64_t> exp_convergence;
    exp->add_option("--table", exp_table, "hausdorff | measure | both")
        ->check(CLI::IsMember({"hausdorff", "measure", "both"}));
    exp->add_flag("--full", exp_full, "full-grid mode: 27 cells x 50 reps x 1e5 steps");
    exp->add_option("--convergence", exp_convergence,
                    "run the convergence diagnostic over these step counts instead")
        ->delimiter(',');

    auto* ingest = app.add_subcommand("ingest", "ingest a recorded track CSV");
    add_common(ingest, opts);
    std::string ingest_in;
    bool ingest_rescale = false;
    ingest->add_option("--in", ingest_in, "track CSV (step,time,x,y,on or time,x,y)")->required();
    ingest->add_flag("--rescale-unit-diameter", ingest_rescale,
                     "center and scale the bbox diagonal to 1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help() << std::flush;
        return 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(opts);
        if (sched->parsed()) return cmd_schedule(opts, sched_in, sched_d1, sched_d2, sched_endpoints);
        if (hull->parsed()) return cmd_hull(opts, hull_in, hull_r);
        if (dist->parsed()) {
            if (!dist_against_domain && dist_b.empty()) {
                throw std::invalid_argument("distances: need --b or --against-domain");
            }
            return cmd_distances(opts, dist_a, dist_b, dist_against_domain);
        }
        if (dens->parsed()) return cmd_density(opts, dens_in, dens_bw, dens_spacing);
        if (levels->parsed()) return cmd_levelsets(opts, levels_in, levels_true, levels_lambda);
        if (drift->parsed()) return cmd_drift(opts, drift_in, drift_true, drift_at);
        if (bounds_cmd->parsed()) {
            return cmd_bounds(opts, b_eps, b_p, b_delta1, b_delta2, b_alpha, b_beta, b_c, b_mu, b_d);
        }
        if (advise->parsed()) {
            return cmd_advise(opts, a_batt, a_eps, a_delta2, a_alpha, a_beta, a_c, a_mu, a_d, a_pmax);
        }
        if (exp->parsed()) return cmd_experiment(opts, exp_table, exp_full, exp_convergence);
        if (ingest->parsed()) return cmd_ingest(opts, ingest_in, ingest_rescale);
    } catch (const io::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const io::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
