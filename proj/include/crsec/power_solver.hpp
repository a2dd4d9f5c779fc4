// Optimal busy/idle power control for the effective secure capacity.
//
// For each fading draw the optimal normalized power is either zero (when the
// secrecy margin does not clear the gamma0-dependent threshold) or the unique
// fixed point X = H(X) of a decreasing map. The fixed point is found with the
// bracketed midpoint/fixed-point iteration below; `oracle_policy` recovers the
// same value independently by minimizing the per-draw Lagrangian. gamma0 is
// then calibrated so the sensing-weighted average power meets the interference
// budget with equality.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "crsec/fading.hpp"
#include "crsec/parallel.hpp"
#include "crsec/params.hpp"
#include "crsec/secrecy_rates.hpp"

namespace crsec {

struct SolverConfig {
    double fp_tolerance = 1e-8;
    int max_fp_iters = 500;
    double gamma_tolerance = 1e-4;
    int max_gamma_iters = 200;
    double gamma_low = 1e-6;
    double gamma_high = 1e3;
    unsigned threads = 1;
};

inline void validate(const SolverConfig& cfg) {
    detail::require(cfg.fp_tolerance > 0.0, "fp_tolerance must be > 0");
    detail::require(cfg.gamma_tolerance > 0.0, "gamma_tolerance must be > 0");
    detail::require(cfg.max_fp_iters >= 1, "max_fp_iters must be >= 1");
    detail::require(cfg.max_gamma_iters >= 1, "max_gamma_iters must be >= 1");
    detail::require(cfg.gamma_low > 0.0 && cfg.gamma_low < cfg.gamma_high,
                    "gamma bracket must satisfy 0 < gamma_low < gamma_high");
}

enum class Branch { Busy, Idle };

struct PolicyPair {
    double mu_b = 0.0;
    double mu_i = 0.0;
    int iters_b = 0;
    int iters_i = 0;
};

/// Draw-specific quantities of one branch. The busy branch sees the main link
/// attenuated by beta; both branches are charged the idle-case eavesdropper
/// capacity (the busy branch through the confusion rate C_e3).
struct BranchModel {
    double z_m = 0.0;
    double z_e = 0.0;
    double alpha_i = 1.0;
    double beta = 1.0;     // beta for busy, 1 for idle
    double weight = 0.0;   // p_b or p_i
    double cost = 0.0;     // P_d or 1 - P_d, share of the interference budget
    double snr = 1.0;
    double kappa = 0.0;

    BranchModel(Branch br, const FadingDraw& d, const SystemParams& p, const DerivedConstants& c,
                const StateProbabilities& probs)
        : z_m(d.z_m),
          z_e(d.z_e),
          alpha_i(c.alpha_i),
          beta(br == Branch::Busy ? c.beta : 1.0),
          weight(br == Branch::Busy ? probs.p_b : probs.p_i),
          cost(br == Branch::Busy ? p.p_d : 1.0 - p.p_d),
          snr(p.snr),
          kappa(c.kappa) {}

    /// z_m - z_e*beta*alpha_i: positive iff the branch can carry secret bits.
    double margin() const { return z_m - z_e * beta * alpha_i; }

    double threshold(double gamma0) const { return gamma0 * cost * beta / weight; }

    bool active(double gamma0) const {
        return weight > 0.0 && margin() > threshold(gamma0);
    }

    /// ln of the service ratio (1 + z_m*snr*x/beta) / (1 + z_e*alpha_i*snr*x).
    double log_ratio(double x) const {
        return std::log1p(z_m * snr * x / beta) - std::log1p(z_e * alpha_i * snr * x);
    }

    /// e^{-theta*T*r(x)} for positive secure rate r: f(X) or g(X).
    double service_mgf(double x) const { return std::exp(-kappa * log_ratio(x)); }

    /// H(X) in the cancellation-free form
    ///   2 (w f d / (gamma0 c) - beta) / (snr (d sqrt(1+Phi) + s)),
    /// obtained by rationalizing d sqrt(1+Phi) - s with s^2 - d^2 = 4 z_m z_e beta alpha_i.
    double rhs(double x, double gamma0) const {
        const double d = margin();
        const double s = z_m + z_e * beta * alpha_i;
        const double f = service_mgf(x);
        const double phi = 4.0 * z_m * z_e * alpha_i * weight * f / (gamma0 * cost * d);
        const double num = weight * f * d / (gamma0 * cost) - beta;
        return 2.0 * num / (snr * (d * std::sqrt(1.0 + phi) + s));
    }

    /// Stationary point of w (1 + z_m snr mu / beta)^{-kappa} + gamma0 kappa snr c mu,
    /// the per-draw Lagrangian when the eavesdropper link is absent.
    double no_eavesdropper_policy(double gamma0) const {
        const double ratio = weight * z_m / (beta * gamma0 * cost);
        if (ratio <= 1.0) return 0.0;
        return beta / (z_m * snr) * std::expm1(std::log(ratio) / (kappa + 1.0));
    }
};

namespace detail {
inline void require_solvable(const BranchModel& m) {
    if (m.weight > 0.0 && m.cost <= 0.0)
        throw std::invalid_argument(
            "branch power is unconstrained: p_d must lie strictly inside (0,1) when the "
            "branch has positive probability");
}
}  // namespace detail

/// H_b(x) or H_i(x). Requires the strict threshold inequality and z_e > 0.
inline double fixed_point_rhs(Branch br, double x, const FadingDraw& d, double gamma0,
                              const SystemParams& p, const DerivedConstants& c,
                              const StateProbabilities& probs) {
    const BranchModel m(br, d, p, c, probs);
    detail::require_solvable(m);
    if (!(x >= 0.0)) throw std::invalid_argument("fixed_point_rhs: x must be >= 0");
    if (!(gamma0 > 0.0)) throw std::invalid_argument("fixed_point_rhs: gamma0 must be > 0");
    if (d.z_e <= 0.0)
        throw std::domain_error("fixed_point_rhs: z_e = 0 uses the no-eavesdropper closed form");
    if (!m.active(gamma0))
        throw std::domain_error("fixed_point_rhs: threshold inequality not satisfied, mu = 0");
    return m.rhs(x, gamma0);
}

struct BranchSolution {
    double mu = 0.0;
    int iters = 0;
};

/// Bracketed iteration for X = H(X) with H decreasing. Keeps lo <= X* <= hi and
/// alternates fixed-point steps with midpoint steps; counts evaluations of H
/// after H(0). The returned value lies within fp_tolerance of the fixed point:
/// X* always sits between mid and H(mid). A midpoint step is forced whenever
/// two evaluations fail to halve the bracket.
inline BranchSolution solve_branch(const BranchModel& m, double gamma0, const SolverConfig& cfg) {
    detail::require_solvable(m);
    if (!m.active(gamma0)) return {0.0, 0};
    if (m.z_e <= 0.0) return {m.no_eavesdropper_policy(gamma0), 0};

    double lo = 0.0;
    double hi = m.rhs(0.0, gamma0);
    double mid = 0.5 * (lo + hi);
    // Bracket widths one and two evaluations back.
    double width_1 = hi;
    double width_2 = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_fp_iters; ++it) {
        const double mu = m.rhs(mid, gamma0);
        if (std::abs(mu - mid) <= cfg.fp_tolerance) return {std::max(mu, 0.0), it};
        // Where H is very steep the residual cannot reach tolerance in double
        // precision; the root is still pinned once the bracket is that narrow.
        if (hi - lo <= cfg.fp_tolerance) return {std::max(std::clamp(mu, lo, hi), 0.0), it};
        if (mu > hi) {
            lo = mid;
            mid = 0.5 * (lo + hi);
        } else if (mu > mid) {
            lo = mid;
            hi = mu;
            mid = mu;
        } else if (mu > lo) {
            hi = mid;
            lo = mu;
            mid = mu;
        } else {
            hi = mid;
            mid = 0.5 * (lo + hi);
        }
        // With |H'(X*)| > 1 the fixed-point moves settle on a period-2 orbit of H
        // and stop shrinking the bracket; fall back to its midpoint then.
        const double width = hi - lo;
        if (width > 0.5 * width_2) mid = 0.5 * (lo + hi);
        width_2 = width_1;
        width_1 = width;
    }
    std::ostringstream msg;
    msg << "power iteration did not converge in " << cfg.max_fp_iters
        << " evaluations (z_m=" << m.z_m << ", z_e=" << m.z_e << ", gamma0=" << gamma0
        << ", bracket=[" << lo << ", " << hi << "])";
    throw NumericalError(msg.str());
}

inline PolicyPair solve_policy(const FadingDraw& d, double gamma0, const SystemParams& p,
                               const DerivedConstants& c, const StateProbabilities& probs,
                               const SolverConfig& cfg) {
    if (!(gamma0 > 0.0)) throw std::invalid_argument("solve_policy: gamma0 must be > 0");
    const auto busy = solve_branch(BranchModel(Branch::Busy, d, p, c, probs), gamma0, cfg);
    const auto idle = solve_branch(BranchModel(Branch::Idle, d, p, c, probs), gamma0, cfg);
    return {busy.mu, idle.mu, busy.iters, idle.iters};
}

inline ScenarioOutcome scenario_outcome(Scenario k, const FadingDraw& d, const PolicyPair& policy,
                                        const SystemParams& p, const DerivedConstants& c) {
    return scenario_outcome(k, d, policy.mu_b, policy.mu_i, p, c);
}

/// Independent check of the fixed point: golden-section minimization of the
/// per-draw Lagrangian  w * mgf(mu) + gamma0 * kappa * snr * c * mu  on
/// [0, 10 H(0)]. Comparisons use the exact difference of two Lagrangian values
/// so precision is not lost to cancellation near the flat minimum.
inline double oracle_policy(Branch br, const FadingDraw& d, double gamma0, const SystemParams& p,
                            const DerivedConstants& c, const StateProbabilities& probs,
                            double precision = 1e-9) {
    const BranchModel m(br, d, p, c, probs);
    detail::require_solvable(m);
    if (!(gamma0 > 0.0)) throw std::invalid_argument("oracle_policy: gamma0 must be > 0");
    if (!(m.kappa > 0.0)) throw std::invalid_argument("oracle_policy: requires theta > 0");
    if (m.weight <= 0.0 || m.margin() <= 0.0) return 0.0;
    const double h0 = m.rhs(0.0, gamma0);
    if (!(h0 > 0.0)) return 0.0;

    const double price = gamma0 * m.kappa * m.snr * m.cost;
    const double gm = m.z_m * m.snr / m.beta;
    const double ge = m.z_e * m.alpha_i * m.snr;
    // J(a) - J(b), evaluated without forming J(a) and J(b).
    auto delta = [&](double a, double b) {
        const double step = a - b;
        const double dlog = std::log1p(gm * step / (1.0 + gm * b)) -
                            std::log1p(ge * step / (1.0 + ge * b));
        return m.weight * m.service_mgf(b) * std::expm1(-m.kappa * dlog) + price * step;
    };

    const double upper = 10.0 * h0;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0;
    double b = upper;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    while (b - a > precision) {
        if (delta(x1, x2) <= 0.0) {
            b = x2;
            x2 = x1;
            x1 = b - inv_phi * (b - a);
        } else {
            a = x1;
            x1 = x2;
            x2 = a + inv_phi * (b - a);
        }
    }
    const double argmin = 0.5 * (a + b);
    if (upper - argmin <= 2.0 * precision)
        throw NumericalError("oracle_policy: minimizer reached the bracket edge");
    return argmin;
}

/// P_d * mean(mu_b) + (1 - P_d) * mean(mu_i).
inline double average_power(std::span<const PolicyPair> policies, double p_d) {
    if (policies.empty()) throw std::invalid_argument("average_power: empty policy set");
    double sum_b = 0.0;
    double sum_i = 0.0;
    for (const auto& pol : policies) {
        sum_b += pol.mu_b;
        sum_i += pol.mu_i;
    }
    const double n = static_cast<double>(policies.size());
    return p_d * sum_b / n + (1.0 - p_d) * sum_i / n;
}

inline std::vector<PolicyPair> solve_policies(std::span<const FadingDraw> draws, double gamma0,
                                              const SystemParams& p, const DerivedConstants& c,
                                              const StateProbabilities& probs,
                                              const SolverConfig& cfg) {
    std::vector<PolicyPair> out(draws.size());
    parallel_for(draws.size(), cfg.threads,
                 [&](std::size_t i) { out[i] = solve_policy(draws[i], gamma0, p, c, probs, cfg); });
    return out;
}

struct CalibrationResult {
    double gamma0 = 0.0;
    double achieved_power = 0.0;
    int gamma_iters = 0;
    std::vector<PolicyPair> policies;
};

/// Finds gamma0 with |average_power - 1| <= gamma_tolerance by geometric
/// bisection; average power is non-increasing in gamma0. The draw set is held
/// fixed across trials.
inline CalibrationResult calibrate_gamma(std::span<const FadingDraw> draws, const SystemParams& p,
                                         const DerivedConstants& c,
                                         const StateProbabilities& probs,
                                         const SolverConfig& cfg) {
    validate(cfg);
    if (draws.empty()) throw std::invalid_argument("calibrate_gamma: empty draw set");

    CalibrationResult res;
    auto trial = [&](double gamma0) {
        ++res.gamma_iters;
        auto pol = solve_policies(draws, gamma0, p, c, probs, cfg);
        const double power = average_power(pol, p.p_d);
        return std::pair{power, std::move(pol)};
    };
    auto accept = [&](double gamma0, std::pair<double, std::vector<PolicyPair>>& t) {
        res.gamma0 = gamma0;
        res.achieved_power = t.first;
        res.policies = std::move(t.second);
        return res;
    };
    auto converged = [&](double power) { return std::abs(power - 1.0) <= cfg.gamma_tolerance; };

    constexpr int kMaxExpansions = 40;
    double lo = cfg.gamma_low;
    double hi = cfg.gamma_high;
    auto at_lo = trial(lo);
    for (int k = 0; at_lo.first < 1.0 && !converged(at_lo.first); ++k) {
        if (k == kMaxExpansions) {
            std::ostringstream msg;
            msg << "calibrate_gamma: average power " << at_lo.first << " < 1 even at gamma0="
                << lo << "; interference budget cannot be reached";
            throw NumericalError(msg.str());
        }
        hi = lo;
        lo /= 10.0;
        at_lo = trial(lo);
    }
    if (converged(at_lo.first)) return accept(lo, at_lo);

    auto at_hi = trial(hi);
    for (int k = 0; at_hi.first > 1.0 && !converged(at_hi.first); ++k) {
        if (k == kMaxExpansions) {
            std::ostringstream msg;
            msg << "calibrate_gamma: average power " << at_hi.first << " > 1 even at gamma0="
                << hi;
            throw NumericalError(msg.str());
        }
        lo = hi;
        hi *= 10.0;
        at_hi = trial(hi);
    }
    if (converged(at_hi.first)) return accept(hi, at_hi);

    while (res.gamma_iters < cfg.max_gamma_iters) {
        const double mid = std::sqrt(lo * hi);
        auto at_mid = trial(mid);
        if (converged(at_mid.first)) return accept(mid, at_mid);
        if (at_mid.first > 1.0)
            lo = mid;
        else
            hi = mid;
        if (hi / lo - 1.0 < 1e-15) break;
    }
    std::ostringstream msg;
    msg << "calibrate_gamma: no convergence after " << res.gamma_iters << " trials; bracket=["
        << lo << ", " << hi << "]";
    throw NumericalError(msg.str());
}

}  // namespace crsec
