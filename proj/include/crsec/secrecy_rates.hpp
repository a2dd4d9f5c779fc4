// Instantaneous secrecy capacities of the four sensing scenarios and the
// busy/idle secure-rate policy built on them. Rates are in bits/s.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crsec/fading.hpp"
#include "crsec/params.hpp"

namespace crsec {

/// SINR terms zeta_{m,k} and zeta_{e,k} of one scenario.
struct SinrPair {
    double main = 0.0;
    double eve = 0.0;
};

inline SinrPair scenario_sinr(Scenario k, const FadingDraw& d, double mu, const SystemParams& p,
                              const DerivedConstants& c) {
    const double s = p.snr * mu;
    if (actually_busy(k)) return {d.z_m * s / c.beta, d.z_e * c.alpha_b * s / c.beta};
    return {d.z_m * s, d.z_e * c.alpha_i * s};
}

/// B*log2(1 + zeta).
inline double link_capacity(double zeta, double bandwidth) {
    return bandwidth * std::log1p(zeta) / std::numbers::ln2;
}

namespace detail {
inline void require_power(double mu) {
    if (!(mu >= 0.0)) throw std::invalid_argument("normalized power must be >= 0");
}
inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }
}  // namespace detail

/// C_k = [C_mk - C_ek]^+ for scenario k at power mu.
inline double secrecy_capacity(Scenario k, const FadingDraw& d, double mu, const SystemParams& p,
                               const DerivedConstants& c) {
    detail::require_power(mu);
    const auto z = scenario_sinr(k, d, mu, p, c);
    return detail::positive_part(link_capacity(z.main, p.bandwidth_B) -
                                 link_capacity(z.eve, p.bandwidth_B));
}

/// Rate split of one sensing decision: the secure rate plus the confusion rate
/// spent on the eavesdropper.
struct RatePlan {
    double secure = 0.0;     // r_b or r_i
    double confusion = 0.0;  // r_be or r_ie
    double total() const { return secure + confusion; }
};

/// Busy decision: main term of S1 against the S3 eavesdropper capacity, so the
/// confusion rate covers the eavesdropper whether or not the PU is really there.
/// Idle decision: C_4.
inline RatePlan rate_plan(bool detected_busy_flag, const FadingDraw& d, double mu,
                          const SystemParams& p, const DerivedConstants& c) {
    detail::require_power(mu);
    const double s = p.snr * mu;
    const double main = detected_busy_flag ? d.z_m * s / c.beta : d.z_m * s;
    const double eve = d.z_e * c.alpha_i * s;
    const double c_main = link_capacity(main, p.bandwidth_B);
    const double c_eve = link_capacity(eve, p.bandwidth_B);
    if (c_main <= c_eve) return {0.0, 0.0};
    return {c_main - c_eve, c_eve};
}

inline double secure_rate(bool detected_busy_flag, const FadingDraw& d, double mu,
                          const SystemParams& p, const DerivedConstants& c) {
    return rate_plan(detected_busy_flag, d, mu, p, c).secure;
}

struct ScenarioOutcome {
    bool reliable = true;
    bool secret = true;
    double service_bits = 0.0;
};

/// Per-frame result of transmitting under the secure-rate policy while scenario
/// `k` is in force. Secrecy holds when the confusion rate covers the
/// eavesdropper's actual capacity; S2 frames are never decodable and their data
/// stays queued for retransmission.
inline ScenarioOutcome scenario_outcome(Scenario k, const FadingDraw& d, double mu_b, double mu_i,
                                        const SystemParams& p, const DerivedConstants& c) {
    detail::require_power(mu_b);
    detail::require_power(mu_i);
    const bool busy_decision = detected_busy(k);
    const double mu = busy_decision ? mu_b : mu_i;
    const RatePlan plan = rate_plan(busy_decision, d, mu, p, c);
    const auto z = scenario_sinr(k, d, mu, p, c);
    const double actual_eve = link_capacity(z.eve, p.bandwidth_B);
    const double actual_main = link_capacity(z.main, p.bandwidth_B);

    ScenarioOutcome out;
    // A frame carrying no secret bits cannot leak any.
    const double slack = 1e-9 * std::max(1.0, actual_eve);
    out.secret = plan.secure <= 0.0 || plan.confusion + slack >= actual_eve;
    if (k == Scenario::BusyDetectedIdle) {
        out.reliable = false;
        out.service_bits = 0.0;
        return out;
    }
    out.reliable = plan.total() <= actual_main * (1.0 + 1e-12) + 1e-12;
    out.service_bits = out.reliable ? p.frame_T * plan.secure : 0.0;
    return out;
}

}  // namespace crsec
