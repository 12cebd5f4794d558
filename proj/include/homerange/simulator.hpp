#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "homerange/geometry.hpp"

namespace homerange {

// --- seeding and Gaussian sampling -----------------------------------------
//
// The RNG is pinned: mt19937_64 driven Box-Muller with the 53-bit uniform
// mapping below. Identical (seed, params) reproduce trajectories bit for bit
// on any platform; trajectory metadata records the algorithm tag.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable per-(cell, replicate) seed derivation from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = master;
    std::uint64_t x = splitmix64(s) ^ (a * 0x9e3779b97f4a7c15ULL);
    std::uint64_t y = splitmix64(x) ^ (b * 0xc2b2ae3d27d4eb4fULL);
    return splitmix64(y);
}

inline constexpr const char* kRngTag = "mt19937_64-boxmuller";

class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    // standard normal
    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    Vec2 next_increment(double step_sd) {
        const double zx = next();
        const double zy = next();
        return {step_sd * zx, step_sd * zy};
    }

  private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// --- drift fields -----------------------------------------------------------

struct Drift {
    std::string name;
    std::function<Vec2(Vec2)> nu;  // nu(x) = -1/2 grad f(x)
};

inline Drift make_zero_drift() {
    return {"zero", [](Vec2) { return Vec2{0.0, 0.0}; }};
}

// f(x, y) = x^2 + y^2, so nu(x, y) = -(x, y): the simulation-study drift.
inline Drift make_radial_ou_drift() {
    return {"radial_ou", [](Vec2 p) { return Vec2{-p.x, -p.y}; }};
}

// nu = -1/2 grad f for a named potential.
inline Drift make_drift_from_potential(const std::string& potential) {
    if (potential == "quadratic") return {"grad:quadratic", [](Vec2 p) { return Vec2{-p.x, -p.y}; }};
    if (potential == "quartic") {
        return {"grad:quartic",
                [](Vec2 p) { return Vec2{-p.x * p.x * p.x, -p.y * p.y * p.y}; }};
    }
    throw std::invalid_argument("unknown potential '" + potential +
                                "' (expected quadratic | quartic)");
}

inline Drift make_drift_by_name(const std::string& name) {
    if (name == "zero") return make_zero_drift();
    if (name == "radial_ou") return make_radial_ou_drift();
    if (name.rfind("grad:", 0) == 0) return make_drift_from_potential(name.substr(5));
    throw std::invalid_argument("unknown drift '" + name +
                                "' (expected zero | radial_ou | grad:<potential>)");
}

// --- core types -------------------------------------------------------------

struct SimParams {
    Domain domain;
    double h = 0.01;          // time step
    std::int64_t n_steps = 1; // number of recorded points, X_0 .. X_{N-1}
    Vec2 start{0.0, -0.5};
    Drift drift = make_radial_ou_drift();
    std::uint64_t seed = 0;
};

struct OnOffSchedule {
    std::int64_t delta1_steps = 0;  // ON window, in steps (> 0)
    std::int64_t delta2_steps = 0;  // OFF window, in steps (0 = always on)
    double h = 0.01;

    std::int64_t period() const { return delta1_steps + delta2_steps; }
    bool on(std::int64_t i) const { return (i % period()) < delta1_steps; }
    double delta1_time() const { return static_cast<double>(delta1_steps) * h; }
    double delta2_time() const { return static_cast<double>(delta2_steps) * h; }
};

inline void validate(const OnOffSchedule& s) {
    if (s.delta1_steps <= 0) throw std::invalid_argument("OnOffSchedule: delta1_steps must be > 0");
    if (s.delta2_steps < 0) throw std::invalid_argument("OnOffSchedule: delta2_steps must be >= 0");
    if (!(s.h > 0.0)) throw std::invalid_argument("OnOffSchedule: h must be > 0");
}

struct TrajectoryMeta {
    std::uint64_t seed = 0;
    double h = 0.0;
    std::string domain_name;
    std::string drift_name;
    std::string rng = kRngTag;
    std::int64_t rejected_steps = 0;
};

struct Trajectory {
    std::vector<std::int64_t> steps;  // original step indices
    std::vector<double> times;
    std::vector<Vec2> points;
    std::vector<std::uint8_t> on;
    TrajectoryMeta meta;

    std::size_t size() const { return points.size(); }
};

// --- operations -------------------------------------------------------------

// One move of the discretized reflection scheme: y = x + z + h*nu(x); keep y
// if inside, otherwise its boundary mirror if that is inside, otherwise stay.
// `rejected` counts the stay-put fallback when provided.
inline Vec2 step(Vec2 x, Vec2 z, const SimParams& params, std::int64_t* rejected = nullptr) {
    const Vec2 y = x + z + params.h * params.drift.nu(x);
    if (contains(params.domain, y)) return y;
    const auto sym = try_reflect(params.domain, y);
    if (sym && contains(params.domain, *sym)) return *sym;
    if (rejected) ++*rejected;
    return x;
}

inline Trajectory simulate(const SimParams& params) {
    if (!(params.h > 0.0)) throw std::invalid_argument("simulate: h must be > 0");
    if (params.n_steps < 1) throw std::invalid_argument("simulate: n_steps must be >= 1");
    if (!is_finite(params.start) || !contains(params.domain, params.start)) {
        throw std::invalid_argument("simulate: start point is not inside the domain");
    }

    Trajectory traj;
    const std::size_t n = static_cast<std::size_t>(params.n_steps);
    traj.steps.resize(n);
    traj.times.resize(n);
    traj.points.resize(n);
    traj.on.assign(n, 1);
    traj.meta.seed = params.seed;
    traj.meta.h = params.h;
    traj.meta.domain_name = params.domain.name;
    traj.meta.drift_name = params.drift.name;

    GaussianSampler sampler(params.seed);
    const double step_sd = std::sqrt(params.h);
    Vec2 x = params.start;
    for (std::size_t i = 0; i < n; ++i) {
        traj.steps[i] = static_cast<std::int64_t>(i);
        traj.times[i] = static_cast<double>(i) * params.h;
        traj.points[i] = x;
        if (i + 1 < n) {
            x = step(x, sampler.next_increment(step_sd), params, &traj.meta.rejected_steps);
        }
    }
    return traj;
}

// ON subsequence; original step indices and times are preserved.
inline Trajectory apply_schedule(const Trajectory& traj, const OnOffSchedule& sched) {
    validate(sched);
    if (traj.meta.h > 0.0 && std::abs(traj.meta.h - sched.h) > 1e-12 * sched.h) {
        throw std::invalid_argument("apply_schedule: trajectory and schedule disagree on h");
    }
    Trajectory out;
    out.meta = traj.meta;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const bool keep = sched.on(traj.steps[k]);
        if (keep) {
            out.steps.push_back(traj.steps[k]);
            out.times.push_back(traj.times[k]);
            out.points.push_back(traj.points[k]);
            out.on.push_back(1);
        }
    }
    return out;
}

// Number of indices i in [0, n_steps) with a(i) = 1.
inline std::int64_t scheduled_on_count(std::int64_t n_steps, const OnOffSchedule& sched) {
    validate(sched);
    const std::int64_t period = sched.period();
    const std::int64_t full = n_steps / period;
    const std::int64_t rem = n_steps % period;
    return full * sched.delta1_steps + std::min(rem, sched.delta1_steps);
}

// Contiguous-observation baseline: the first n_keep points.
inline Trajectory prefix_window(const Trajectory& traj, std::int64_t n_keep) {
    if (n_keep < 1 || static_cast<std::size_t>(n_keep) > traj.size()) {
        throw std::invalid_argument("prefix_window: n_keep out of range [1, " +
                                    std::to_string(traj.size()) + "]");
    }
    Trajectory out;
    out.meta = traj.meta;
    const std::size_t n = static_cast<std::size_t>(n_keep);
    out.steps.assign(traj.steps.begin(), traj.steps.begin() + n);
    out.times.assign(traj.times.begin(), traj.times.begin() + n);
    out.points.assign(traj.points.begin(), traj.points.begin() + n);
    out.on.assign(traj.on.begin(), traj.on.begin() + n);
    return out;
}

// Final point of each of the first n ON windows: step index
// (k+1)*delta1 + k*delta2 - 1 for k = 0..n-1 (0-based steps).
inline std::vector<Vec2> endpoint_subsample(const Trajectory& traj, const OnOffSchedule& sched,
                                            std::int64_t n) {
    validate(sched);
    if (n < 1) throw std::invalid_argument("endpoint_subsample: n must be >= 1");
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(n));
    std::size_t cursor = 0;
    for (std::int64_t k = 0; k < n; ++k) {
        const std::int64_t want = (k + 1) * sched.delta1_steps + k * sched.delta2_steps - 1;
        while (cursor < traj.size() && traj.steps[cursor] < want) ++cursor;
        if (cursor >= traj.size() || traj.steps[cursor] != want) {
            throw std::invalid_argument(
                "endpoint_subsample: trajectory holds only " + std::to_string(k) +
                " complete ON windows (requested " + std::to_string(n) + ")");
        }
        out.push_back(traj.points[cursor]);
    }
    return out;
}

}  // namespace homerange
