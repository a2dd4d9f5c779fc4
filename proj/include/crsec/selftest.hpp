// Reduced-size oracle and invariant checks, runnable from the CLI.
#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "crsec/capacity.hpp"
#include "crsec/power_solver.hpp"
#include "crsec/queue_sim.hpp"

namespace crsec {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline std::vector<CheckResult> run_selftest(unsigned threads = 1) {
    std::vector<CheckResult> out;
    auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
        try {
            auto [ok, detail] = fn();
            out.push_back({name, ok, detail});
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("exception: ") + e.what()});
        }
    };
    SolverConfig cfg;
    cfg.threads = threads;

    check("state probabilities sum to 1", [] {
        double worst = 0.0;
        for (int a = 0; a < 10; ++a)
            for (int b = 0; b < 10; ++b)
                for (int c = 0; c < 10; ++c) {
                    const auto s = state_probabilities(a / 9.0, b / 9.0, c / 9.0);
                    worst = std::max(worst, std::abs(s.p_b + s.p_i + s.p_0 - 1.0));
                }
        return std::pair{worst <= 1e-15, "max |sum - 1| = " + format_sig9(worst)};
    });

    check("fixed point matches Lagrangian oracle", [&] {
        SystemParams p;
        p.theta = 1.0;
        const auto c = derive_constants(p);
        const auto probs = state_probabilities(p);
        const auto draws = sample_fading(101, 20'000, p);
        const auto cal = calibrate_gamma(draws, p, c, probs, cfg);
        double worst = 0.0;
        for (std::size_t i = 0; i < 200; ++i) {
            const auto& pol = cal.policies[i];
            worst = std::max(worst, std::abs(pol.mu_b - oracle_policy(Branch::Busy, draws[i], cal.gamma0, p, c, probs)));
            worst = std::max(worst, std::abs(pol.mu_i - oracle_policy(Branch::Idle, draws[i], cal.gamma0, p, c, probs)));
        }
        return std::pair{worst <= 1e-6, "max |mu - oracle| = " + format_sig9(worst)};
    });

    check("interference constraint met after calibration", [&] {
        SystemParams p;
        const auto draws = sample_fading(102, 20'000, p);
        const auto cal = calibrate_gamma(draws, p, derive_constants(p), state_probabilities(p), cfg);
        const double power = average_power(cal.policies, p.p_d);
        return std::pair{std::abs(power - 1.0) <= cfg.gamma_tolerance,
                         "average power = " + format_sig9(power)};
    });

    check("Monte Carlo and quadrature R_e agree", [&] {
        SystemParams p;
        p.theta = 0.01;
        const auto draws = sample_fading(103, 100'000, p);
        const auto ev = evaluate_on(draws, p, cfg, 103);
        const double quad = quadrature_effective_capacity(ev.result.gamma0, p, cfg);
        const double rel = std::abs(quad - ev.result.r_e) / ev.result.r_e;
        return std::pair{rel <= 5e-3, "relative gap = " + format_sig9(rel)};
    });

    check("R_e bounded by ergodic rate", [&] {
        SystemParams p;
        p.theta = 0.1;
        const auto r = maximize_capacity(p, cfg, 104, 20'000);
        return std::pair{r.r_e <= r.ergodic_rate,
                         "R_e = " + format_sig9(r.r_e) + ", ergodic = " + format_sig9(r.ergodic_rate)};
    });

    check("no security outages in simulated frames", [&] {
        SystemParams p;
        p.theta = 0.01;
        const auto r = maximize_capacity(p, cfg, 105, 20'000);
        SimConfig sc;
        sc.params = p;
        sc.solver = cfg;
        sc.n_frames = 100'000;
        sc.seed = 106;
        sc.policy = PolicySource::calibrated(r.gamma0);
        sc.arrival_rate = 0.5 * r.bits_per_frame(p);
        const auto sim = simulate_queue(sc);
        bool only_s2 = true;
        for (auto k : kAllScenarios)
            if (k != Scenario::BusyDetectedIdle && sim.outages[index_of(k)].reliability_outages > 0)
                only_s2 = false;
        return std::pair{sim.security_outages() == 0 && only_s2,
                         "security outages = " + std::to_string(sim.security_outages())};
    });

    check("identical seeds give identical sweep CSV", [&] {
        SweepSpec spec;
        spec.axis = SweepAxis::Theta;
        spec.grid = {0.01, 0.1};
        auto render = [&] {
            std::ostringstream os;
            write_sweep_csv(os, sweep(spec, cfg, 107, 5'000));
            return os.str();
        };
        return std::pair{render() == render(), std::string("two runs compared")};
    });
    return out;
}

}  // namespace crsec
