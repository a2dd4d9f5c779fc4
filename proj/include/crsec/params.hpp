// Exogenous system parameters, derived constants and sensing-state probabilities
// for a cognitive-radio wiretap link.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace crsec {

/// Raised when an iterative routine fails to converge or a bracket cannot be found.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// All exogenous scalars. Variances are dimensionless powers, `snr` is linear
/// (P_int / (B * sigma2_nm)), `theta` is the QoS exponent in 1/bits.
struct SystemParams {
    double rho = 0.1;
    double p_d = 0.9;
    double p_f = 0.1;
    double sigma2_nm = 1.0;
    double sigma2_ne = 1.0;
    double sigma2_sm = 1.0;
    double sigma2_se = 1.0;
    double sigma2_m = 1.0;
    double sigma2_e = 1.0;
    double bandwidth_B = 100.0;
    double frame_T = 1.0;
    double snr = 10.0;
    double theta = 1.0;

    bool operator==(const SystemParams&) const = default;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}
inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
}  // namespace detail

/// Throws std::invalid_argument naming the first violated field.
inline void validate(const SystemParams& p) {
    using detail::is_probability;
    using detail::require;
    require(is_probability(p.rho), "rho must lie in [0,1]");
    require(is_probability(p.p_d), "p_d must lie in [0,1]");
    require(is_probability(p.p_f), "p_f must lie in [0,1]");
    require(p.sigma2_nm > 0.0, "sigma2_nm must be > 0");
    require(p.sigma2_ne > 0.0, "sigma2_ne must be > 0");
    require(p.sigma2_sm >= 0.0, "sigma2_sm must be >= 0");
    require(p.sigma2_se >= 0.0, "sigma2_se must be >= 0");
    require(p.sigma2_m > 0.0, "sigma2_m must be > 0");
    // sigma2_e == 0 is the degenerate no-eavesdropper-link case.
    require(p.sigma2_e >= 0.0, "sigma2_e must be >= 0");
    require(p.bandwidth_B > 0.0, "bandwidth_B must be > 0");
    require(p.frame_T > 0.0, "frame_T must be > 0");
    require(p.snr > 0.0, "snr must be > 0");
    require(p.theta >= 0.0, "theta must be >= 0");
}

struct DerivedConstants {
    double alpha_b = 1.0;
    double alpha_i = 1.0;
    double beta = 1.0;
    /// theta*T*B / ln 2: e^{-theta*T*B*log2(x)} == x^{-kappa}.
    double kappa = 0.0;
};

inline DerivedConstants derive_constants(const SystemParams& p) {
    validate(p);
    DerivedConstants c;
    c.alpha_b = (p.sigma2_nm + p.sigma2_sm) / (p.sigma2_ne + p.sigma2_se);
    c.alpha_i = p.sigma2_nm / p.sigma2_ne;
    c.beta = 1.0 + p.sigma2_sm / p.sigma2_nm;
    c.kappa = p.theta * p.frame_T * p.bandwidth_B / std::numbers::ln2;
    return c;
}

/// Probabilities of the three service classes: detected busy (scenarios 1 and 3),
/// idle detected idle (scenario 4), missed detection (scenario 2).
struct StateProbabilities {
    double p_b = 0.0;
    double p_i = 0.0;
    double p_0 = 0.0;
};

inline StateProbabilities state_probabilities(double rho, double p_d, double p_f) {
    using detail::is_probability;
    detail::require(is_probability(rho) && is_probability(p_d) && is_probability(p_f),
                    "state_probabilities: inputs must lie in [0,1]");
    StateProbabilities s;
    s.p_0 = rho * (1.0 - p_d);
    s.p_i = (1.0 - rho) * (1.0 - p_f);
    // Complementing the other two keeps the sum at exactly 1 in floating point;
    // analytically this is rho*p_d + (1-rho)*p_f.
    s.p_b = 1.0 - s.p_0 - s.p_i;
    if (s.p_b < 0.0) s.p_b = 0.0;
    return s;
}

inline StateProbabilities state_probabilities(const SystemParams& p) {
    return state_probabilities(p.rho, p.p_d, p.p_f);
}

enum class Scenario : int {
    BusyDetectedBusy = 1,  // S1
    BusyDetectedIdle = 2,  // S2, missed detection
    IdleDetectedBusy = 3,  // S3, false alarm
    IdleDetectedIdle = 4,  // S4
};

inline constexpr std::array<Scenario, 4> kAllScenarios = {
    Scenario::BusyDetectedBusy, Scenario::BusyDetectedIdle, Scenario::IdleDetectedBusy,
    Scenario::IdleDetectedIdle};

inline constexpr bool detected_busy(Scenario s) {
    return s == Scenario::BusyDetectedBusy || s == Scenario::IdleDetectedBusy;
}

inline constexpr bool actually_busy(Scenario s) {
    return s == Scenario::BusyDetectedBusy || s == Scenario::BusyDetectedIdle;
}

inline constexpr int index_of(Scenario s) { return static_cast<int>(s) - 1; }

/// Per-frame sampling probabilities of S1..S4.
inline std::array<double, 4> scenario_probabilities(const SystemParams& p) {
    return {p.rho * p.p_d, p.rho * (1.0 - p.p_d), (1.0 - p.rho) * p.p_f,
            (1.0 - p.rho) * (1.0 - p.p_f)};
}

/// Maps a uniform u in [0,1) onto a scenario by inverse CDF.
inline Scenario sample_scenario(const SystemParams& p, double u) {
    const auto probs = scenario_probabilities(p);
    double acc = 0.0;
    int last = 0;
    for (int k = 0; k < 4; ++k) {
        if (probs[k] <= 0.0) continue;
        acc += probs[k];
        last = k;
        if (u < acc) return kAllScenarios[k];
    }
    return kAllScenarios[last];
}

}  // namespace crsec
