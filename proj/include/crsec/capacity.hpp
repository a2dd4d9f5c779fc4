// Effective secure capacity of the busy/idle/missed-detection service process,
// its maximization over power policies, and parameter sweeps.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crsec/fading.hpp"
#include "crsec/params.hpp"
#include "crsec/power_solver.hpp"
#include "crsec/quadrature.hpp"
#include "crsec/secrecy_rates.hpp"

namespace crsec {

struct CapacityResult {
    double r_e = 0.0;           // bits/s/Hz
    double gamma0 = 0.0;
    double ergodic_rate = 0.0;  // bits/s/Hz, theta -> 0 reference
    double achieved_power = 0.0;
    double mean_iters_b = 0.0;
    double mean_iters_i = 0.0;
    std::size_t n_draws = 0;
    std::uint64_t seed = 0;

    /// Effective capacity expressed as bits per frame (R_e * B * T).
    double bits_per_frame(const SystemParams& p) const { return r_e * p.bandwidth_B * p.frame_T; }
};

/// Secure rates (bits/s) attached to a policy pair on one draw.
struct ServiceRates {
    double r_b = 0.0;
    double r_i = 0.0;
};

inline ServiceRates service_rates(const FadingDraw& d, const PolicyPair& pol, const SystemParams& p,
                                  const DerivedConstants& c) {
    return {secure_rate(true, d, pol.mu_b, p, c), secure_rate(false, d, pol.mu_i, p, c)};
}

namespace detail {

inline double log_sum_exp(std::span<const double> xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - mx);
    return mx + std::log(acc);
}

/// ln(p_b e^{-theta T r_b} + p_i e^{-theta T r_i} + p_0).
inline double log_service_term(const ServiceRates& r, const SystemParams& p,
                               const StateProbabilities& probs) {
    double terms[3];
    std::size_t k = 0;
    const double tt = p.theta * p.frame_T;
    if (probs.p_b > 0.0) terms[k++] = std::log(probs.p_b) - tt * r.r_b;
    if (probs.p_i > 0.0) terms[k++] = std::log(probs.p_i) - tt * r.r_i;
    if (probs.p_0 > 0.0) terms[k++] = std::log(probs.p_0);
    return log_sum_exp(std::span<const double>(terms, k));
}

inline void require_aligned(std::size_t draws, std::size_t policies) {
    if (draws == 0) throw std::invalid_argument("empty draw set");
    if (draws != policies) throw std::invalid_argument("policies must align with draws");
}

}  // namespace detail

/// -1/(theta B T) * ln of the sample mean of p_b e^{-theta T r_b} + p_i e^{-theta T r_i} + p_0.
/// The mean is accumulated in log space, so large theta*T*r does not underflow.
inline double effective_secure_capacity(std::span<const FadingDraw> draws,
                                        std::span<const PolicyPair> policies,
                                        const SystemParams& p, const StateProbabilities& probs) {
    detail::require_aligned(draws.size(), policies.size());
    if (!(p.theta > 0.0))
        throw std::invalid_argument("effective_secure_capacity: theta must be > 0 (use ergodic_rate)");
    const auto c = derive_constants(p);
    std::vector<double> logs(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        logs[i] = detail::log_service_term(service_rates(draws[i], policies[i], p, c), p, probs);
    const double log_mean = detail::log_sum_exp(logs) - std::log(static_cast<double>(draws.size()));
    return -log_mean / (p.theta * p.bandwidth_B * p.frame_T);
}

/// E[p_b r_b + p_i r_i] / B.
inline double ergodic_rate(std::span<const FadingDraw> draws, std::span<const PolicyPair> policies,
                           const SystemParams& p, const StateProbabilities& probs) {
    detail::require_aligned(draws.size(), policies.size());
    const auto c = derive_constants(p);
    double sum = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto r = service_rates(draws[i], policies[i], p, c);
        sum += probs.p_b * r.r_b + probs.p_i * r.r_i;
    }
    return sum / static_cast<double>(draws.size()) / p.bandwidth_B;
}

/// Upper bound -ln(p_0)/(theta B T) on R_e when p_0 > 0: even unbounded rates
/// cannot push the expectation below p_0.
inline double missed_detection_cap(const SystemParams& p) {
    const auto probs = state_probabilities(p);
    if (probs.p_0 <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(probs.p_0) / (p.theta * p.bandwidth_B * p.frame_T);
}

struct Evaluation {
    CapacityResult result;
    CalibrationResult calibration;
};

/// Calibrates gamma0 on `draws`, then evaluates R_e with the resulting policies.
inline Evaluation evaluate_on(std::span<const FadingDraw> draws, const SystemParams& p,
                              const SolverConfig& cfg, std::uint64_t seed) {
    const auto c = derive_constants(p);
    const auto probs = state_probabilities(p);
    Evaluation ev;
    ev.calibration = calibrate_gamma(draws, p, c, probs, cfg);
    const auto& pol = ev.calibration.policies;
    auto& r = ev.result;
    r.gamma0 = ev.calibration.gamma0;
    r.achieved_power = ev.calibration.achieved_power;
    r.r_e = effective_secure_capacity(draws, pol, p, probs);
    r.ergodic_rate = ergodic_rate(draws, pol, p, probs);
    double it_b = 0.0;
    double it_i = 0.0;
    for (const auto& q : pol) {
        it_b += q.iters_b;
        it_i += q.iters_i;
    }
    r.mean_iters_b = it_b / static_cast<double>(pol.size());
    r.mean_iters_i = it_i / static_cast<double>(pol.size());
    r.n_draws = draws.size();
    r.seed = seed;
    return ev;
}

inline CapacityResult maximize_capacity(const SystemParams& p, const SolverConfig& cfg,
                                        std::uint64_t seed, std::size_t n) {
    const auto draws = sample_fading(seed, n, p);
    return evaluate_on(draws, p, cfg, seed).result;
}

/// Deterministic Gauss–Laguerre counterparts of the sample-mean estimators for
/// a given gamma0. Each branch is integrated over its own active region
/// {margin > threshold}; outside it the branch transmits nothing, so its power
/// is 0 and its service term is exactly 1. At a calibrated gamma0 the optimal
/// power jumps almost discontinuously across that boundary, which a plain
/// tensor rule resolves poorly.
struct QuadratureBranch {
    double active_probability = 0.0;
    double mean_power = 0.0;    // E[mu ; active]
    double mean_service = 0.0;  // E[e^{-theta T r} ; active]
};

inline QuadratureBranch quadrature_branch(Branch br, double gamma0, const SystemParams& p,
                                          const SolverConfig& cfg, const LaguerreRule& rule) {
    const auto c = derive_constants(p);
    const auto probs = state_probabilities(p);
    const BranchModel shape(br, FadingDraw{}, p, c, probs);
    QuadratureBranch out;
    if (shape.weight <= 0.0) return out;
    const double offset = shape.threshold(gamma0);
    const double slope = shape.beta * shape.alpha_i;
    auto mu_at = [&](const FadingDraw& d) {
        return solve_branch(BranchModel(br, d, p, c, probs), gamma0, cfg).mu;
    };
    out.active_probability = expect_over_region(p, rule, offset, slope, [](const FadingDraw&) { return 1.0; });
    out.mean_power = expect_over_region(p, rule, offset, slope, mu_at);
    out.mean_service = expect_over_region(p, rule, offset, slope, [&](const FadingDraw& d) {
        return BranchModel(br, d, p, c, probs).service_mgf(mu_at(d));
    });
    return out;
}

inline double quadrature_average_power(double gamma0, const SystemParams& p, const SolverConfig& cfg,
                                       int nodes = 32) {
    const auto rule = gauss_laguerre(nodes);
    const auto busy = quadrature_branch(Branch::Busy, gamma0, p, cfg, rule);
    const auto idle = quadrature_branch(Branch::Idle, gamma0, p, cfg, rule);
    return p.p_d * busy.mean_power + (1.0 - p.p_d) * idle.mean_power;
}

inline double quadrature_effective_capacity(double gamma0, const SystemParams& p,
                                            const SolverConfig& cfg, int nodes = 32) {
    if (!(p.theta > 0.0)) throw std::invalid_argument("quadrature_effective_capacity: theta must be > 0");
    const auto probs = state_probabilities(p);
    const auto rule = gauss_laguerre(nodes);
    const auto busy = quadrature_branch(Branch::Busy, gamma0, p, cfg, rule);
    const auto idle = quadrature_branch(Branch::Idle, gamma0, p, cfg, rule);
    const double mean = probs.p_b * (1.0 - busy.active_probability + busy.mean_service) +
                        probs.p_i * (1.0 - idle.active_probability + idle.mean_service) + probs.p_0;
    return -std::log(mean) / (p.theta * p.bandwidth_B * p.frame_T);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { Theta, Snr, Beta, Sensing };

inline std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::Theta: return "theta";
        case SweepAxis::Snr: return "snr";
        case SweepAxis::Beta: return "beta";
        case SweepAxis::Sensing: return "sensing";
    }
    return "?";
}

inline SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "theta") return SweepAxis::Theta;
    if (s == "snr") return SweepAxis::Snr;
    if (s == "beta") return SweepAxis::Beta;
    if (s == "sensing") return SweepAxis::Sensing;
    throw std::invalid_argument("unknown sweep axis '" + s + "' (theta|snr|beta|sensing)");
}

/// Grid values: theta in 1/bits, snr in dB, beta as a ratio >= 1; for the
/// sensing axis the grid is the index 0..k-1 into `sensing_pairs` (P_f, P_d).
struct SweepSpec {
    SweepAxis axis = SweepAxis::Theta;
    std::vector<double> grid;
    SystemParams fixed;
    std::vector<std::pair<double, double>> sensing_pairs;
};

inline void validate(const SweepSpec& s) {
    detail::require(!s.grid.empty(), "sweep grid must be nonempty");
    for (std::size_t i = 1; i < s.grid.size(); ++i)
        detail::require(s.grid[i] > s.grid[i - 1], "sweep grid must be strictly increasing");
    if (s.axis == SweepAxis::Sensing) {
        detail::require(s.sensing_pairs.size() == s.grid.size(),
                        "sensing sweep needs one (P_f, P_d) pair per grid point");
    }
    if (s.axis == SweepAxis::Beta)
        detail::require(s.grid.front() >= 1.0, "beta grid values must be >= 1");
    validate(s.fixed);
}

/// Baseline with the swept quantity set to grid point `idx`. A beta point moves
/// sigma2_sm (sigma2_nm and sigma2_se stay fixed).
inline SystemParams apply_axis(const SweepSpec& s, std::size_t idx) {
    SystemParams p = s.fixed;
    const double v = s.grid.at(idx);
    switch (s.axis) {
        case SweepAxis::Theta: p.theta = v; break;
        case SweepAxis::Snr: p.snr = db_to_linear(v); break;
        case SweepAxis::Beta: p.sigma2_sm = (v - 1.0) * p.sigma2_nm; break;
        case SweepAxis::Sensing:
            p.p_f = s.sensing_pairs.at(idx).first;
            p.p_d = s.sensing_pairs.at(idx).second;
            break;
    }
    return p;
}

struct SweepRow {
    double axis_value = 0.0;
    SystemParams params;
    CapacityResult result;
    bool ok = false;
    std::string error;
};

/// One row per grid point, all evaluated on a single shared draw set. A failing
/// point is recorded and the sweep continues.
inline std::vector<SweepRow> sweep(const SweepSpec& spec, const SolverConfig& cfg,
                                   std::uint64_t seed, std::size_t n) {
    validate(spec);
    const auto draws = sample_fading(seed, n, spec.fixed);
    std::vector<SweepRow> rows;
    rows.reserve(spec.grid.size());
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        SweepRow row;
        row.axis_value = spec.grid[i];
        row.params = apply_axis(spec, i);
        try {
            row.result = evaluate_on(draws, row.params, cfg, seed).result;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
            row.result.n_draws = n;
            row.result.seed = seed;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Formats with 9 significant digits; non-finite values print as "nan"/"inf".
inline std::string format_sig9(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

inline constexpr const char* kSweepCsvHeader =
    "axis_value,r_e_bits_s_hz,gamma0,mean_iters_b,mean_iters_i,n_draws,seed,r_e_bits_frame";

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
    os << kSweepCsvHeader << '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : rows) {
        const auto& r = row.result;
        os << format_sig9(row.axis_value) << ',' << format_sig9(row.ok ? r.r_e : nan) << ','
           << format_sig9(row.ok ? r.gamma0 : nan) << ','
           << format_sig9(row.ok ? r.mean_iters_b : nan) << ','
           << format_sig9(row.ok ? r.mean_iters_i : nan) << ',' << r.n_draws << ',' << r.seed
           << ',' << format_sig9(row.ok ? r.bits_per_frame(row.params) : nan) << '\n';
    }
}

}  // namespace crsec
