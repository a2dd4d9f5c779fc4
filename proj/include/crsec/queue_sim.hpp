// Frame-level simulation of the four-scenario service process feeding a data
// buffer at a constant arrival rate. Used to check that an arrival rate below
// the effective secure capacity produces a queue tail decaying at least as
// fast as e^{-theta q}.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsec/fading.hpp"
#include "crsec/params.hpp"
#include "crsec/power_solver.hpp"
#include "crsec/secrecy_rates.hpp"

namespace crsec {

/// Where per-frame powers come from: the optimal policy at a calibrated gamma0,
/// or constant powers.
struct PolicySource {
    enum class Kind { CalibratedGamma, FixedPower };
    Kind kind = Kind::CalibratedGamma;
    double gamma0 = 0.0;
    double mu_b = 0.0;
    double mu_i = 0.0;

    static PolicySource calibrated(double gamma0) { return {Kind::CalibratedGamma, gamma0, 0.0, 0.0}; }
    static PolicySource fixed(double mu_b, double mu_i) { return {Kind::FixedPower, 0.0, mu_b, mu_i}; }
};

struct SimConfig {
    std::size_t n_frames = 1'000'000;
    double arrival_rate = 0.0;  // bits/frame
    std::uint64_t seed = 1;
    SystemParams params;
    PolicySource policy;
    SolverConfig solver;
    double warmup_fraction = 0.1;
    int tail_points = 50;
};

struct TailPoint {
    double q = 0.0;            // bits
    double probability = 0.0;  // Pr(Q >= q)
};

struct ScenarioTally {
    std::size_t frames = 0;
    std::size_t reliability_outages = 0;
    std::size_t security_outages = 0;
};

struct SimResult {
    std::vector<TailPoint> queue_tail;
    std::optional<double> decay_estimate;  // 1/bits; empty when the tail is too thin
    std::string decay_error;
    double mean_service = 0.0;             // bits/frame over all frames
    std::array<ScenarioTally, 4> outages{};
    bool unstable = false;
    double final_queue = 0.0;
    double max_queue = 0.0;
    std::size_t recorded_frames = 0;

    std::size_t security_outages() const {
        std::size_t n = 0;
        for (const auto& t : outages) n += t.security_outages;
        return n;
    }
};

/// Negated least-squares slope of ln Pr(Q >= q) against q, over tail points with
/// probability in [p_min, p_max]. Throws NumericalError with fewer than 5 points.
inline double estimate_decay(std::span<const TailPoint> tail, double p_min = 1e-5,
                             double p_max = 1e-1) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const auto& t : tail) {
        if (!(t.probability >= p_min && t.probability <= p_max)) continue;
        const double y = std::log(t.probability);
        sx += t.q;
        sy += y;
        sxx += t.q * t.q;
        sxy += t.q * y;
        ++n;
    }
    if (n < 5)
        throw NumericalError("estimate_decay: insufficient tail mass (" + std::to_string(n) +
                             " points in the probability band, need 5)");
    const double nd = static_cast<double>(n);
    const double denom = nd * sxx - sx * sx;
    if (!(denom > 0.0)) throw NumericalError("estimate_decay: degenerate threshold grid");
    const double slope = (nd * sxy - sx * sy) / denom;
    return std::max(0.0, -slope);
}

/// Pr(Q >= q) on a logarithmic grid of `points` thresholds spanning two decades
/// below the largest observed queue (or [1, 100] bits when the queue stays empty).
inline std::vector<TailPoint> tail_histogram(std::vector<double> samples, int points) {
    if (points < 2) throw std::invalid_argument("tail_histogram: need at least 2 points");
    std::sort(samples.begin(), samples.end());
    const double q_hi = samples.empty() ? 0.0 : samples.back();
    const double top = q_hi > 0.0 ? q_hi : 100.0;
    const double bottom = top / 100.0;
    std::vector<TailPoint> tail(points);
    const double n = static_cast<double>(samples.size());
    for (int k = 0; k < points; ++k) {
        const double q = bottom * std::pow(top / bottom, static_cast<double>(k) / (points - 1));
        const auto first = std::lower_bound(samples.begin(), samples.end(), q);
        const double count = static_cast<double>(samples.end() - first);
        tail[k] = {q, n > 0.0 ? count / n : 0.0};
    }
    return tail;
}

inline SimResult simulate_queue(const SimConfig& cfg) {
    const SystemParams& p = cfg.params;
    const auto c = derive_constants(p);
    const auto probs = state_probabilities(p);
    if (!(cfg.arrival_rate >= 0.0)) throw std::invalid_argument("arrival_rate must be >= 0");
    if (cfg.n_frames == 0) throw std::invalid_argument("n_frames must be >= 1");
    if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0))
        throw std::invalid_argument("warmup_fraction must lie in [0,1)");
    const bool calibrated = cfg.policy.kind == PolicySource::Kind::CalibratedGamma;
    if (calibrated && !(cfg.policy.gamma0 > 0.0))
        throw std::invalid_argument("calibrated policy source needs gamma0 > 0");

    const CounterRng fading_rng(cfg.seed, Stream::SimFading);
    const CounterRng scenario_rng(cfg.seed, Stream::Scenario);
    const auto warmup = static_cast<std::size_t>(cfg.warmup_fraction * static_cast<double>(cfg.n_frames));

    SimResult res;
    std::vector<double> recorded;
    recorded.reserve(cfg.n_frames - warmup);
    double queue = 0.0;
    double service_total = 0.0;
    for (std::size_t f = 0; f < cfg.n_frames; ++f) {
        const FadingDraw d = fading_at(fading_rng, f, p);
        const Scenario k = sample_scenario(p, scenario_rng.uniform(f));
        double mu_b = cfg.policy.mu_b;
        double mu_i = cfg.policy.mu_i;
        if (calibrated) {
            const Branch br = detected_busy(k) ? Branch::Busy : Branch::Idle;
            const double mu = solve_branch(BranchModel(br, d, p, c, probs), cfg.policy.gamma0, cfg.solver).mu;
            (br == Branch::Busy ? mu_b : mu_i) = mu;
        }
        const auto out = scenario_outcome(k, d, mu_b, mu_i, p, c);
        auto& tally = res.outages[index_of(k)];
        ++tally.frames;
        if (!out.reliable) ++tally.reliability_outages;
        if (!out.secret) ++tally.security_outages;

        service_total += out.service_bits;
        queue = std::max(0.0, queue + cfg.arrival_rate - out.service_bits);
        res.max_queue = std::max(res.max_queue, queue);
        if (f >= warmup) recorded.push_back(queue);
    }
    res.final_queue = queue;
    res.recorded_frames = recorded.size();
    res.mean_service = service_total / static_cast<double>(cfg.n_frames);
    // A stable queue keeps returning to zero; a linear drift leaves a backlog
    // comparable to the accumulated excess arrivals.
    const double total_arrivals = cfg.arrival_rate * static_cast<double>(cfg.n_frames);
    res.unstable = cfg.arrival_rate > 0.0 &&
                   (cfg.arrival_rate >= res.mean_service || queue > 0.1 * total_arrivals);

    res.queue_tail = tail_histogram(std::move(recorded), cfg.tail_points);
    try {
        res.decay_estimate = estimate_decay(res.queue_tail);
    } catch (const NumericalError& e) {
        res.decay_error = e.what();
    }
    return res;
}

}  // namespace crsec
