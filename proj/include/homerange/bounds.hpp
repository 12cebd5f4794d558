#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "homerange/geometry.hpp"

namespace homerange {

// Geometric-ergodicity inputs: the total-variation mixing constants
// (alpha, beta), the infimum of the stationary density over the set, its
// Lebesgue measure, and the dimension. alpha and beta exist but are not
// computable from first principles; they are user inputs.
struct ErgodicityParams {
    double alpha = 1.0;
    double beta = 1.0;
    double c_inf = 1.0;
    double mu_S = 1.0;
    int d = 2;
};

inline void validate(const ErgodicityParams& p) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.c_inf > 0.0) || !(p.mu_S > 0.0) || p.d < 1) {
        throw std::invalid_argument("ErgodicityParams: all parameters must be strictly positive");
    }
}

// Largest epsilon the tail bounds accept; equivalently the epsilon at which
// delta = c*omega_d*(eps/2)^d / 2 reaches beta.
inline double max_feasible_epsilon(const ErgodicityParams& p) {
    validate(p);
    return 2.0 * std::pow(2.0 * p.beta / (p.c_inf * unit_ball_volume(p.d)), 1.0 / p.d);
}

namespace detail {

struct BoundPieces {
    double delta = 0.0;  // c*omega_d*(eps/2)^d / 2
    double t1 = 0.0;     // (1/alpha) log(beta/delta)
    double c1 = 0.0;     // (eps/4)^{-d} mu_S / omega_d
    double ball = 0.0;   // c*omega_d*(eps/2)^d
};

inline BoundPieces bound_pieces(double epsilon, const ErgodicityParams& p) {
    validate(p);
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    const double eps_max = max_feasible_epsilon(p);
    if (epsilon >= eps_max) {
        throw std::invalid_argument("epsilon = " + std::to_string(epsilon) +
                                    " violates the tail condition; maximum feasible epsilon is " +
                                    std::to_string(eps_max));
    }
    BoundPieces out;
    const double omega = unit_ball_volume(p.d);
    out.ball = p.c_inf * omega * std::pow(epsilon / 2.0, p.d);
    out.delta = out.ball / 2.0;
    out.t1 = std::log(p.beta / out.delta) / p.alpha;
    out.c1 = std::pow(epsilon / 4.0, -p.d) * p.mu_S / omega;
    return out;
}

}  // namespace detail

// Right-hand side of the delta_1 feasibility condition
// delta_1 > (1/alpha) log(2 beta / (c omega_d (eps/2)^d)); non-positive
// values mean any positive delta_1 works. Evaluated for every epsilon > 0:
// the tail bounds' epsilon constraint is exactly the condition for a positive
// result, and it is enforced where the bound formulas need it.
inline double min_delta1(double epsilon, const ErgodicityParams& params) {
    validate(params);
    if (!(epsilon > 0.0)) throw std::invalid_argument("min_delta1: epsilon must be > 0");
    const double omega = unit_ball_volume(params.d);
    return std::log(2.0 * params.beta /
                    (params.c_inf * omega * std::pow(epsilon / 2.0, params.d))) /
           params.alpha;
}

struct BoundValue {
    double raw = 0.0;      // the bound as evaluated (may exceed 1)
    double clamped = 0.0;  // min(raw, 1)
    bool feasible = false; // strict delta_1 > t_1
};

// Tail bound for contiguous observation on [0, p*delta_1]:
// C1 exp(-ball * p * (delta_1 - t_1) / (2 t_1)). delta_1 == t_1 evaluates to
// C1 and is flagged infeasible; delta_1 < t_1 is rejected.
inline BoundValue bound_contiguous(double epsilon, std::int64_t p, double delta1,
                                   const ErgodicityParams& params) {
    if (p < 1) throw std::invalid_argument("bound_contiguous: p must be >= 1");
    const auto pieces = detail::bound_pieces(epsilon, params);
    if (delta1 < pieces.t1) {
        throw std::invalid_argument("bound_contiguous: infeasible delta1 = " +
                                    std::to_string(delta1) + " < required " +
                                    std::to_string(pieces.t1));
    }
    BoundValue out;
    out.raw = pieces.c1 * std::exp(-pieces.ball * static_cast<double>(p) *
                                   (delta1 - pieces.t1) / (2.0 * pieces.t1));
    out.clamped = std::min(out.raw, 1.0);
    out.feasible = delta1 > pieces.t1;
    return out;
}

// On-off tail bound: the contiguous bound times
// exp(-delta (p-1) (2 - (delta/beta)^{l2-1})) with l2 = delta_2 / t_1.
inline BoundValue bound_onoff(double epsilon, std::int64_t p, double delta1, double delta2,
                              const ErgodicityParams& params) {
    if (delta2 < 0.0) throw std::invalid_argument("bound_onoff: delta2 must be >= 0");
    BoundValue out = bound_contiguous(epsilon, p, delta1, params);
    const auto pieces = detail::bound_pieces(epsilon, params);
    const double l2 = delta2 / pieces.t1;
    const double extra = std::exp(-pieces.delta * static_cast<double>(p - 1) *
                                  (2.0 - std::pow(pieces.delta / params.beta, l2 - 1.0)));
    out.raw *= extra;
    out.clamped = std::min(out.raw, 1.0);
    return out;
}

// Every intermediate quantity of the tail-bound proof plus both bounds.
// C2 and C3 are effective per-unit exponents recovered from the final
// expressions: bound_contiguous = C1 e^{-C2 p delta1},
// bound_onoff = bound_contiguous * e^{-C3 p}.
struct BoundReport {
    double epsilon = 0.0;
    double delta = 0.0;
    double t1 = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double bound_onoff_raw = 0.0;
    double bound_onoff = 0.0;
    double bound_contiguous_raw = 0.0;
    double bound_contiguous = 0.0;
    bool feasible = false;
    bool l1_integer = false;  // the proof's bookkeeping assumes integer l1, l2;
    bool l2_integer = false;  // the formulas are evaluated for real values
};

inline BoundReport make_bound_report(double epsilon, std::int64_t p, double delta1,
                                     double delta2, const ErgodicityParams& params) {
    const auto pieces = detail::bound_pieces(epsilon, params);
    const BoundValue contig = bound_contiguous(epsilon, p, delta1, params);
    const BoundValue onoff = bound_onoff(epsilon, p, delta1, delta2, params);

    BoundReport r;
    r.epsilon = epsilon;
    r.delta = pieces.delta;
    r.t1 = pieces.t1;
    r.l1 = delta1 / pieces.t1;
    r.l2 = delta2 / pieces.t1;
    r.C1 = pieces.c1;
    r.C2 = pieces.ball * (delta1 - pieces.t1) / (2.0 * pieces.t1 * delta1);
    r.C3 = pieces.delta * static_cast<double>(p - 1) / static_cast<double>(p) *
           (2.0 - std::pow(pieces.delta / params.beta, r.l2 - 1.0));
    r.bound_contiguous_raw = contig.raw;
    r.bound_contiguous = contig.clamped;
    r.bound_onoff_raw = onoff.raw;
    r.bound_onoff = onoff.clamped;
    r.feasible = contig.feasible;
    r.l1_integer = std::abs(r.l1 - std::round(r.l1)) <= 1e-9;
    r.l2_integer = std::abs(r.l2 - std::round(r.l2)) <= 1e-9;
    return r;
}

struct ScheduleAdvice {
    double delta1 = 0.0;
    std::int64_t p = 0;
    // on-off bound at the advised split; absent when epsilon exceeds the
    // tail condition (the unconstrained regime, where the formulas do not
    // apply but any delta1 works)
    std::optional<BoundValue> bound;
};

// Battery split rule: p as large as possible, then
// delta_1 = B/p as small as possible while satisfying the feasibility
// condition strictly (1e-9 margin).
inline ScheduleAdvice advise_schedule(double battery, double epsilon,
                                      const ErgodicityParams& params, std::int64_t p_max,
                                      double delta2) {
    if (!(battery > 0.0)) throw std::invalid_argument("advise_schedule: battery must be > 0");
    if (p_max < 1) throw std::invalid_argument("advise_schedule: p_max must be >= 1");
    const double need = min_delta1(epsilon, params);
    std::int64_t p = p_max;
    if (need > 0.0) {
        p = static_cast<std::int64_t>(std::floor(battery / (need + 1e-9)));
        while (p >= 1 && !(battery / static_cast<double>(p) > need + 1e-9)) --p;
        p = std::min(p, p_max);
        if (p < 1) {
            throw std::invalid_argument(
                "advise_schedule: battery too short for requested epsilon (needs delta1 > " +
                std::to_string(need) + ")");
        }
    }
    ScheduleAdvice out;
    out.p = p;
    out.delta1 = battery / static_cast<double>(p);
    if (epsilon < max_feasible_epsilon(params)) {
        out.bound = bound_onoff(epsilon, p, out.delta1, delta2, params);
    }
    return out;
}

// Rate curve (log(T)^2 / T)^{1/d} for convergence-diagnostic overlays.
inline std::vector<double> rate_curve(std::span<const double> T_values, int d) {
    if (d < 1) throw std::invalid_argument("rate_curve: d must be >= 1");
    std::vector<double> out;
    out.reserve(T_values.size());
    for (double T : T_values) {
        if (!(T > 1.0)) throw std::invalid_argument("rate_curve: T must be > 1");
        const double lt = std::log(T);
        out.push_back(std::pow(lt * lt / T, 1.0 / d));
    }
    return out;
}

}  // namespace homerange
