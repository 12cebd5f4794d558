#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "homerange/bounds.hpp"
#include "homerange/density.hpp"
#include "homerange/experiments.hpp"
#include "homerange/geometry.hpp"
#include "homerange/grid.hpp"
#include "homerange/simulator.hpp"

namespace homerange::io {

namespace fs = std::filesystem;
using nlohmann::json;

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// 17 significant digits: doubles round-trip exactly through this format.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

inline std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

inline double parse_double(std::string_view field, const fs::path& path, std::size_t line,
                           const char* what) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": non-numeric " +
                      std::string(what) + " field '" + std::string(field) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= line.size(); ++k) {
        if (k == line.size() || line[k] == ',') {
            out.push_back(line.substr(start, k - start));
            start = k + 1;
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace detail

// --- trajectory CSV ----------------------------------------------------------
//
// Format: '#'-prefixed key=value metadata comments, then the header
// `step,time,x,y,on`, one row per step. The same reader ingests bare
// `time,x,y` tracks (steps become row indices, all flags ON).

inline void write_trajectory_csv(const Trajectory& traj, const fs::path& path) {
    auto out = detail::open_out(path);
    out << "# seed=" << traj.meta.seed << "\n";
    out << "# h=" << fmt_g17(traj.meta.h) << "\n";
    if (!traj.meta.domain_name.empty()) out << "# domain=" << traj.meta.domain_name << "\n";
    if (!traj.meta.drift_name.empty()) out << "# drift=" << traj.meta.drift_name << "\n";
    out << "# rng=" << traj.meta.rng << "\n";
    out << "# rejected_steps=" << traj.meta.rejected_steps << "\n";
    out << "step,time,x,y,on\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << traj.steps[k] << ',' << fmt_g17(traj.times[k]) << ',' << fmt_g17(traj.points[k].x)
            << ',' << fmt_g17(traj.points[k].y) << ',' << (traj.on[k] ? 1 : 0) << "\n";
    }
}

inline Trajectory read_trajectory_csv(const fs::path& path) {
    auto in = detail::open_in(path);
    Trajectory traj;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    bool has_step_col = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '#') {
            const auto eq = sv.find('=');
            if (eq != std::string_view::npos) {
                const std::string key{detail::trim(sv.substr(1, eq - 1))};
                const std::string val{detail::trim(sv.substr(eq + 1))};
                try {
                    if (key == "seed") traj.meta.seed = std::stoull(val);
                    else if (key == "h") traj.meta.h = std::stod(val);
                    else if (key == "domain") traj.meta.domain_name = val;
                    else if (key == "drift") traj.meta.drift_name = val;
                    else if (key == "rng") traj.meta.rng = val;
                    else if (key == "rejected_steps") traj.meta.rejected_steps = std::stoll(val);
                } catch (const std::exception&) {
                    throw IoError(path.string() + ":" + std::to_string(lineno) +
                                  ": malformed metadata comment '" + std::string(sv) + "'");
                }
            }
            continue;
        }
        if (!header_seen) {
            if (sv == "step,time,x,y,on") {
                has_step_col = true;
            } else if (sv == "time,x,y") {
                has_step_col = false;
            } else {
                throw IoError(path.string() + ":" + std::to_string(lineno) +
                              ": expected header 'step,time,x,y,on' or 'time,x,y', got '" +
                              std::string(sv) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv(sv);
        const std::size_t expect = has_step_col ? 5 : 3;
        if (fields.size() != expect) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(expect) + " fields, got " +
                          std::to_string(fields.size()));
        }
        std::size_t f = 0;
        std::int64_t step = static_cast<std::int64_t>(traj.points.size());
        if (has_step_col) {
            step = static_cast<std::int64_t>(
                detail::parse_double(detail::trim(fields[f++]), path, lineno, "step"));
        }
        const double t = detail::parse_double(detail::trim(fields[f++]), path, lineno, "time");
        const double x = detail::parse_double(detail::trim(fields[f++]), path, lineno, "x");
        const double y = detail::parse_double(detail::trim(fields[f++]), path, lineno, "y");
        bool on = true;
        if (has_step_col) {
            on = detail::parse_double(detail::trim(fields[f++]), path, lineno, "on") != 0.0;
        }
        if (!traj.times.empty() && t < traj.times.back()) {
            throw IoError(path.string() + ":" + std::to_string(lineno) +
                          ": unsorted timestamps (" + fmt_g17(t) + " after " +
                          fmt_g17(traj.times.back()) + ")");
        }
        traj.steps.push_back(step);
        traj.times.push_back(t);
        traj.points.push_back({x, y});
        traj.on.push_back(on ? 1 : 0);
    }
    if (!header_seen) throw IoError(path.string() + ": empty file");
    if (traj.points.empty()) throw IoError(path.string() + ": no data rows");
    return traj;
}

// Recorded-track ingestion is plain trajectory reading: raw timestamps are
// preserved and nothing is resampled.
inline Trajectory ingest_track(const fs::path& path) { return read_trajectory_csv(path); }

struct AffineRescale {
    Vec2 shift;     // applied before scaling
    double scale = 1.0;
};

// Centers the points and scales the bounding-box diagonal to 1 so hull radii
// like 0.02 are meaningful across datasets.
inline AffineRescale rescale_to_unit_diameter(std::vector<Vec2>& pts) {
    if (pts.empty()) throw std::invalid_argument("rescale_to_unit_diameter: empty point list");
    const Bbox box = Bbox::of_points(pts);
    const double diag = std::hypot(box.width(), box.height());
    AffineRescale out;
    out.shift = {-0.5 * (box.lo.x + box.hi.x), -0.5 * (box.lo.y + box.hi.y)};
    out.scale = diag > 0.0 ? 1.0 / diag : 1.0;
    for (Vec2& p : pts) p = (p + out.shift) * out.scale;
    return out;
}

// --- region mask bitmap ------------------------------------------------------
//
// Header `grid x0 y0 spacing nx ny`, then ny rows of nx characters in {0,1},
// top row (j = ny-1) first.

inline void write_mask(const RegionMask& mask, const fs::path& path) {
    auto out = detail::open_out(path);
    const Grid2D& g = mask.grid;
    out << "grid " << fmt_g17(g.origin.x) << ' ' << fmt_g17(g.origin.y) << ' '
        << fmt_g17(g.spacing) << ' ' << g.nx << ' ' << g.ny << "\n";
    std::string row(static_cast<std::size_t>(g.nx), '0');
    for (int j = g.ny - 1; j >= 0; --j) {
        for (int i = 0; i < g.nx; ++i) row[static_cast<std::size_t>(i)] = mask.get(i, j) ? '1' : '0';
        out << row << "\n";
    }
}

inline RegionMask read_mask(const fs::path& path) {
    auto in = detail::open_in(path);
    std::string tag;
    Grid2D g;
    in >> tag >> g.origin.x >> g.origin.y >> g.spacing >> g.nx >> g.ny;
    if (!in || tag != "grid") throw IoError(path.string() + ":1: malformed mask header");
    validate(g);
    RegionMask mask = make_empty_mask(g);
    std::string row;
    std::getline(in, row);  // skip header remainder
    for (int j = g.ny - 1; j >= 0; --j) {
        if (!std::getline(in, row)) {
            throw IoError(path.string() + ": truncated mask (missing rows)");
        }
        const std::string_view sv = detail::trim(row);
        if (sv.size() != static_cast<std::size_t>(g.nx)) {
            throw IoError(path.string() + ": row length " + std::to_string(sv.size()) +
                          " does not match nx=" + std::to_string(g.nx));
        }
        for (int i = 0; i < g.nx; ++i) {
            if (sv[static_cast<std::size_t>(i)] == '1') {
                mask.set(i, j, true);
            } else if (sv[static_cast<std::size_t>(i)] != '0') {
                throw IoError(path.string() + ": mask rows must contain only 0/1");
            }
        }
    }
    return mask;
}

// --- CSV payloads ------------------------------------------------------------

inline void write_polylines_csv(const std::vector<std::vector<Vec2>>& polylines,
                                const fs::path& path) {
    auto out = detail::open_out(path);
    out << "loop_id,x,y\n";
    for (std::size_t id = 0; id < polylines.size(); ++id) {
        for (Vec2 p : polylines[id]) {
            out << id << ',' << fmt_g17(p.x) << ',' << fmt_g17(p.y) << "\n";
        }
    }
}

inline void write_density_csv(const DensityField& field, const fs::path& path) {
    auto out = detail::open_out(path);
    out << "x,y,value\n";
    for (int j = 0; j < field.grid.ny; ++j) {
        for (int i = 0; i < field.grid.nx; ++i) {
            const Vec2 c = field.grid.center(i, j);
            out << fmt_g17(c.x) << ',' << fmt_g17(c.y) << ','
                << fmt_g17(field.values[field.grid.index(i, j)]) << "\n";
        }
    }
}

// --- SVG ---------------------------------------------------------------------
//
// Deterministic standalone SVG: identical inputs produce identical bytes.

namespace detail {

struct SvgFrame {
    Bbox box;
    double scale = 1.0;
    double pad = 10.0;

    double px(double x) const { return pad + (x - box.lo.x) * scale; }
    double py(double y) const { return pad + (box.hi.y - y) * scale; }
    double width() const { return 2 * pad + box.width() * scale; }
    double height() const { return 2 * pad + box.height() * scale; }
};

inline SvgFrame make_frame(const Bbox& box, double target = 640.0) {
    SvgFrame f;
    f.box = box;
    const double extent = std::max(std::max(box.width(), box.height()), 1e-12);
    f.scale = target / extent;
    return f;
}

inline std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

inline std::ofstream open_svg(const fs::path& path, const SvgFrame& f) {
    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_px(f.width())
        << "\" height=\"" << fmt_px(f.height()) << "\">\n";
    return out;
}

inline void svg_polyline(std::ofstream& out, const SvgFrame& f, const std::vector<Vec2>& pts,
                         const char* color, bool closed) {
    out << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" d=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        out << (k == 0 ? 'M' : 'L') << fmt_px(f.px(pts[k].x)) << ' ' << fmt_px(f.py(pts[k].y));
    }
    if (closed) out << 'Z';
    out << "\"/>\n";
}

}  // namespace detail

// Trajectory rendering: one path per maximal run of constant ON flag, black
// for ON and red for OFF, each run extended by the next run's first point so
// the plotted path stays connected.
inline void write_svg_trajectory(const Trajectory& traj, const fs::path& path) {
    if (traj.points.empty()) throw IoError("write_svg_trajectory: empty payload");
    const auto frame = detail::make_frame(Bbox::of_points(traj.points));
    auto out = detail::open_svg(path, frame);
    std::size_t run_start = 0;
    for (std::size_t k = 1; k <= traj.size(); ++k) {
        if (k == traj.size() || traj.on[k] != traj.on[run_start]) {
            std::vector<Vec2> run(traj.points.begin() + run_start, traj.points.begin() + k);
            if (k < traj.size()) run.push_back(traj.points[k]);
            detail::svg_polyline(out, frame, run, traj.on[run_start] ? "black" : "red", false);
            run_start = k;
        }
    }
    out << "</svg>\n";
}

inline void write_svg_polylines(const std::vector<std::vector<Vec2>>& polylines,
                                const fs::path& path) {
    if (polylines.empty()) throw IoError("write_svg_polylines: empty payload");
    std::vector<Vec2> all;
    for (const auto& poly : polylines) all.insert(all.end(), poly.begin(), poly.end());
    if (all.empty()) throw IoError("write_svg_polylines: empty payload");
    const auto frame = detail::make_frame(Bbox::of_points(all));
    auto out = detail::open_svg(path, frame);
    for (const auto& poly : polylines) detail::svg_polyline(out, frame, poly, "black", true);
    out << "</svg>\n";
}

// Density rendering: one filled cell per grid cell, linear grayscale ramp
// from white (0) to black (max).
inline void write_svg_density(const DensityField& field, const fs::path& path) {
    if (field.values.empty()) throw IoError("write_svg_density: empty payload");
    const Grid2D& g = field.grid;
    const Bbox box{{g.origin.x - 0.5 * g.spacing, g.origin.y - 0.5 * g.spacing},
                   {g.origin.x + (g.nx - 0.5) * g.spacing, g.origin.y + (g.ny - 0.5) * g.spacing}};
    const auto frame = detail::make_frame(box);
    auto out = detail::open_svg(path, frame);
    const double vmax = field.max_value();
    const double cell_px = g.spacing * frame.scale;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double v = field.values[g.index(i, j)];
            if (v <= 0.0) continue;
            const int gray = 255 - static_cast<int>(std::lround(255.0 * std::min(v / vmax, 1.0)));
            const Vec2 c = g.center(i, j);
            out << "<rect x=\"" << detail::fmt_px(frame.px(c.x - 0.5 * g.spacing)) << "\" y=\""
                << detail::fmt_px(frame.py(c.y + 0.5 * g.spacing)) << "\" width=\""
                << detail::fmt_px(cell_px) << "\" height=\"" << detail::fmt_px(cell_px)
                << "\" fill=\"rgb(" << gray << ',' << gray << ',' << gray << ")\"/>\n";
        }
    }
    out << "</svg>\n";
}

// --- result tables -----------------------------------------------------------

inline void write_table_csv(const ResultTable& table, const fs::path& path) {
    auto out = detail::open_out(path);
    out << "h,delta1";
    for (std::int64_t d2 : table.delta2_steps) out << ",delta2=" << d2;
    out << "\n";
    char cell[64];
    char hbuf[32];
    for (std::size_t ih = 0; ih < table.h_values.size(); ++ih) {
        for (std::size_t i1 = 0; i1 < table.delta1_steps.size(); ++i1) {
            std::snprintf(hbuf, sizeof(hbuf), "%g", table.h_values[ih]);
            out << hbuf << ',' << table.delta1_steps[i1];
            for (std::size_t i2 = 0; i2 < table.delta2_steps.size(); ++i2) {
                const CellStats& c = table.cell(ih, i1, i2);
                if (!c.defined) {
                    out << ",NA";
                } else {
                    std::snprintf(cell, sizeof(cell), "%.4f (%.4f)", c.mean, c.median);
                    out << ',' << cell;
                }
            }
            out << "\n";
        }
    }
}

inline json table_json(const ResultTable& table) {
    json cells = json::array();
    for (std::size_t ih = 0; ih < table.h_values.size(); ++ih) {
        for (std::size_t i1 = 0; i1 < table.delta1_steps.size(); ++i1) {
            for (std::size_t i2 = 0; i2 < table.delta2_steps.size(); ++i2) {
                const CellStats& c = table.cell(ih, i1, i2);
                cells.push_back({{"h", table.h_values[ih]},
                                 {"delta1", table.delta1_steps[i1]},
                                 {"delta2", table.delta2_steps[i2]},
                                 {"mean", c.mean},
                                 {"median", c.median},
                                 {"raw", c.raw},
                                 {"failures", c.failures},
                                 {"defined", c.defined}});
            }
        }
    }
    return json{{"metric", table.metric},
                {"h_values", table.h_values},
                {"delta1_steps", table.delta1_steps},
                {"delta2_steps", table.delta2_steps},
                {"cells", cells}};
}

inline void write_json(const json& j, const fs::path& path) {
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
}

inline json bound_report_json(const BoundReport& r) {
    return json{{"epsilon", r.epsilon},
                {"delta", r.delta},
                {"t1", r.t1},
                {"l1", r.l1},
                {"l2", r.l2},
                {"C1", r.C1},
                {"C2", r.C2},
                {"C3", r.C3},
                {"bound_onoff_raw", r.bound_onoff_raw},
                {"bound_onoff", r.bound_onoff},
                {"bound_contiguous_raw", r.bound_contiguous_raw},
                {"bound_contiguous", r.bound_contiguous},
                {"feasible", r.feasible},
                {"l1_integer", r.l1_integer},
                {"l2_integer", r.l2_integer}};
}

// --- run configuration -------------------------------------------------------

struct RunConfig {
    Domain domain = make_study_domain();
    // simulation
    double h = 0.01;
    std::int64_t n_steps = 10000;
    Vec2 start{0.0, -0.5};
    std::string drift_name = "radial_ou";
    std::uint64_t seed = 1;
    // schedule
    std::int64_t delta1_steps = 250;
    std::int64_t delta2_steps = 500;
    // estimators
    double r = 0.4;
    double bandwidth = 0.2;
    std::string kernel = "gaussian";
    std::vector<double> lambdas;             // literal levels
    std::vector<double> mass_quantiles{0.5}; // used when lambdas is empty
    double grid_spacing = 0.005;
    double hull_spacing = 0.005;
    int hull_center_divisor = 4;
    // experiments
    ExperimentGrid experiment;
    // io
    std::string out_dir = "out";
    std::optional<std::string> track_path;
    bool rescale_unit_diameter = false;
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') ++line;
    }
    return line;
}

template <typename T>
T get_number(const json& j, const std::string& ptr, const fs::path& path) {
    const json* node = j.contains(json::json_pointer(ptr)) ? &j.at(json::json_pointer(ptr))
                                                           : nullptr;
    if (!node || !node->is_number()) {
        throw ConfigError(path.string() + ": " + ptr + ": expected a number");
    }
    return node->get<T>();
}

inline Vec2 get_vec2(const json& j, const std::string& what, const fs::path& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(path.string() + ": " + what + ": expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Domain parse_domain(const json& j, const fs::path& path) {
    Domain d;
    d.name = j.value("name", "custom");
    if (!j.contains("bbox") || !j["bbox"].is_object()) {
        throw ConfigError(path.string() + ": /domain/bbox: expected {min: [x,y], max: [x,y]}");
    }
    d.bbox.lo = get_vec2(j["bbox"].value("min", json()), "/domain/bbox/min", path);
    d.bbox.hi = get_vec2(j["bbox"].value("max", json()), "/domain/bbox/max", path);
    if (!(d.bbox.lo.x < d.bbox.hi.x) || !(d.bbox.lo.y < d.bbox.hi.y)) {
        throw ConfigError(path.string() + ": /domain/bbox: min must be below max");
    }
    if (!j.contains("primitives") || !j["primitives"].is_array() || j["primitives"].empty()) {
        throw ConfigError(path.string() + ": /domain/primitives: expected a non-empty array");
    }
    std::size_t idx = 0;
    for (const auto& prim : j["primitives"]) {
        const std::string ctx = "/domain/primitives/" + std::to_string(idx++);
        const std::string type = prim.value("type", "");
        if (type == "inside-ellipse") {
            const Vec2 axes = get_vec2(prim.value("semi_axes", json()), ctx + "/semi_axes", path);
            if (!(axes.x > 0.0) || !(axes.y > 0.0)) {
                throw ConfigError(path.string() + ": " + ctx + ": semi_axes must be positive");
            }
            d.primitives.push_back(
                EllipseInside{get_vec2(prim.value("center", json()), ctx + "/center", path), axes});
        } else if (type == "outside-disk" || type == "inside-disk") {
            if (!prim.contains("radius") || !prim["radius"].is_number() ||
                !(prim["radius"].get<double>() > 0.0)) {
                throw ConfigError(path.string() + ": " + ctx + ": radius must be > 0");
            }
            const Vec2 c = get_vec2(prim.value("center", json()), ctx + "/center", path);
            const double radius = prim["radius"].get<double>();
            if (type == "outside-disk") {
                d.primitives.push_back(DiskOutside{c, radius});
            } else {
                d.primitives.push_back(DiskInside{c, radius});
            }
        } else if (type == "inside-polygon") {
            if (!prim.contains("vertices") || !prim["vertices"].is_array() ||
                prim["vertices"].size() < 3) {
                throw ConfigError(path.string() + ": " + ctx + ": need >= 3 vertices");
            }
            PolygonInside poly;
            for (const auto& v : prim["vertices"]) {
                poly.vertices.push_back(get_vec2(v, ctx + "/vertices", path));
            }
            d.primitives.push_back(std::move(poly));
        } else {
            throw ConfigError(path.string() + ": " + ctx + ": unknown primitive type '" + type +
                              "' (expected inside-ellipse | outside-disk | inside-disk | "
                              "inside-polygon)");
        }
    }
    return d;
}

}  // namespace detail

inline RunConfig parse_config(const json& j, const fs::path& path) {
    RunConfig cfg;
    if (j.contains("domain")) cfg.domain = detail::parse_domain(j["domain"], path);
    const auto num = [&](const char* ptr, double dflt) {
        return j.contains(json::json_pointer(ptr)) ? detail::get_number<double>(j, ptr, path)
                                                   : dflt;
    };
    const auto require = [&](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(path.string() + ": " + msg);
    };

    cfg.h = num("/sim/h", cfg.h);
    require(cfg.h > 0.0, "/sim/h: must be > 0");
    cfg.n_steps = static_cast<std::int64_t>(num("/sim/n_steps", static_cast<double>(cfg.n_steps)));
    require(cfg.n_steps >= 1, "/sim/n_steps: must be >= 1");
    if (j.contains(json::json_pointer("/sim/start"))) {
        cfg.start = detail::get_vec2(j["sim"]["start"], "/sim/start", path);
    }
    if (j.contains(json::json_pointer("/sim/drift"))) {
        cfg.drift_name = j["sim"]["drift"].get<std::string>();
        make_drift_by_name(cfg.drift_name);  // validates the name
    }
    cfg.seed = static_cast<std::uint64_t>(num("/sim/seed", static_cast<double>(cfg.seed)));
    require(contains(cfg.domain, cfg.start), "/sim/start: not inside the domain");

    cfg.delta1_steps =
        static_cast<std::int64_t>(num("/schedule/delta1_steps", static_cast<double>(cfg.delta1_steps)));
    cfg.delta2_steps =
        static_cast<std::int64_t>(num("/schedule/delta2_steps", static_cast<double>(cfg.delta2_steps)));
    require(cfg.delta1_steps >= 1, "/schedule/delta1_steps: must be >= 1");
    require(cfg.delta2_steps >= 0, "/schedule/delta2_steps: must be >= 0");

    cfg.r = num("/estimators/r", cfg.r);
    require(cfg.r > 0.0, "/estimators/r: must be > 0");
    cfg.bandwidth = num("/estimators/bandwidth", cfg.bandwidth);
    require(cfg.bandwidth > 0.0, "/estimators/bandwidth: must be > 0");
    if (j.contains(json::json_pointer("/estimators/kernel"))) {
        cfg.kernel = j["estimators"]["kernel"].get<std::string>();
        require(cfg.kernel == "gaussian" || cfg.kernel == "epanechnikov",
                "/estimators/kernel: expected gaussian | epanechnikov");
    }
    if (j.contains(json::json_pointer("/estimators/lambdas"))) {
        for (const auto& v : j["estimators"]["lambdas"]) {
            require(v.is_number() && v.get<double>() > 0.0,
                    "/estimators/lambdas: levels must be > 0");
            cfg.lambdas.push_back(v.get<double>());
        }
    }
    if (j.contains(json::json_pointer("/estimators/mass_quantiles"))) {
        cfg.mass_quantiles.clear();
        for (const auto& v : j["estimators"]["mass_quantiles"]) {
            require(v.is_number() && v.get<double>() > 0.0 && v.get<double>() < 1.0,
                    "/estimators/mass_quantiles: values must be in (0, 1)");
            cfg.mass_quantiles.push_back(v.get<double>());
        }
    }
    cfg.grid_spacing = num("/estimators/grid_spacing", cfg.grid_spacing);
    require(cfg.grid_spacing > 0.0, "/estimators/grid_spacing: must be > 0");
    cfg.hull_spacing = num("/estimators/hull_spacing", cfg.hull_spacing);
    require(cfg.hull_spacing > 0.0, "/estimators/hull_spacing: must be > 0");
    cfg.hull_center_divisor =
        static_cast<int>(num("/estimators/hull_center_divisor", cfg.hull_center_divisor));
    require(cfg.hull_center_divisor >= 1, "/estimators/hull_center_divisor: must be >= 1");

    if (j.contains("experiment")) {
        const json& e = j["experiment"];
        if (e.contains("h_values")) cfg.experiment.h_values = e["h_values"].get<std::vector<double>>();
        if (e.contains("delta1_steps")) {
            cfg.experiment.delta1_steps = e["delta1_steps"].get<std::vector<std::int64_t>>();
        }
        if (e.contains("delta2_steps")) {
            cfg.experiment.delta2_steps = e["delta2_steps"].get<std::vector<std::int64_t>>();
        }
        cfg.experiment.n_steps =
            static_cast<std::int64_t>(num("/experiment/n_steps", static_cast<double>(cfg.experiment.n_steps)));
        cfg.experiment.reps = static_cast<int>(num("/experiment/reps", cfg.experiment.reps));
        cfg.experiment.r = num("/experiment/r", cfg.experiment.r);
        cfg.experiment.master_seed = static_cast<std::uint64_t>(
            num("/experiment/master_seed", static_cast<double>(cfg.experiment.master_seed)));
        cfg.experiment.raster_spacing = num("/experiment/raster_spacing", cfg.experiment.raster_spacing);
        cfg.experiment.hull_spacing = num("/experiment/hull_spacing", cfg.experiment.hull_spacing);
        cfg.experiment.hull_center_divisor = static_cast<int>(
            num("/experiment/hull_center_divisor", cfg.experiment.hull_center_divisor));
        try {
            validate(cfg.experiment);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(path.string() + ": /experiment: " + ex.what());
        }
    }

    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("track_path")) {
        cfg.track_path = j["track_path"].get<std::string>();
        require(fs::exists(*cfg.track_path),
                "/track_path: file does not exist: " + *cfg.track_path);
    }
    if (j.contains("rescale_unit_diameter")) {
        cfg.rescale_unit_diameter = j["rescale_unit_diameter"].get<bool>();
    }
    return cfg;
}

inline RunConfig load_config(const fs::path& path) {
    auto in = detail::open_in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw ConfigError(path.string() + ":" +
                          std::to_string(detail::line_of_offset(text, ex.byte)) +
                          ": JSON parse error: " + ex.what());
    }
    try {
        return parse_config(j, path);
    } catch (const json::exception& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
}

inline json domain_json(const Domain& d) {
    json prims = json::array();
    for (const auto& prim : d.primitives) {
        if (const auto* e = std::get_if<EllipseInside>(&prim)) {
            prims.push_back({{"type", "inside-ellipse"},
                             {"center", {e->center.x, e->center.y}},
                             {"semi_axes", {e->semi_axes.x, e->semi_axes.y}}});
        } else if (const auto* o = std::get_if<DiskOutside>(&prim)) {
            prims.push_back({{"type", "outside-disk"},
                             {"center", {o->center.x, o->center.y}},
                             {"radius", o->radius}});
        } else if (const auto* di = std::get_if<DiskInside>(&prim)) {
            prims.push_back({{"type", "inside-disk"},
                             {"center", {di->center.x, di->center.y}},
                             {"radius", di->radius}});
        } else if (const auto* poly = std::get_if<PolygonInside>(&prim)) {
            json verts = json::array();
            for (Vec2 v : poly->vertices) verts.push_back({v.x, v.y});
            prims.push_back({{"type", "inside-polygon"}, {"vertices", verts}});
        }
    }
    return json{{"name", d.name},
                {"bbox", {{"min", {d.bbox.lo.x, d.bbox.lo.y}}, {"max", {d.bbox.hi.x, d.bbox.hi.y}}}},
                {"primitives", prims}};
}

}  // namespace homerange::io
