// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "crsec/crsec.hpp"

using namespace crsec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool passed = false;
    std::string detail;
};

class Report {
public:
    void run(int id, const std::string& title, const std::function<Outcome()>& body) {
        const auto t0 = Clock::now();
        Outcome out;
        try {
            out = body();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::ostringstream line;
        line << (out.passed ? "PASS" : "FAIL") << " criterion " << id << " [" << title << "] "
             << out.detail << " (" << std::fixed;
        line.precision(1);
        line << seconds_since(t0) << " s)";
        std::cout << line.str() << std::endl;
        if (!out.passed) ++failures_;
    }
    int failures() const { return failures_; }

private:
    int failures_ = 0;
};

std::string fmt(double v) { return format_sig9(v); }

/// Shared inputs for the first two criteria: the baseline at theta = 1 calibrated on 10^5 draws.
struct ThetaOneBaseline {
    SystemParams p;
    DerivedConstants c;
    StateProbabilities probs;
    std::vector<FadingDraw> draws;
    CalibrationResult cal;
    double seconds = 0.0;

    ThetaOneBaseline() {
        p.theta = 1.0;
        p.snr = db_to_linear(10.0);
        c = derive_constants(p);
        probs = state_probabilities(p);
        const auto t0 = Clock::now();
        draws = sample_fading(1, 100'000, p);
        cal = calibrate_gamma(draws, p, c, probs, SolverConfig{});
        seconds = seconds_since(t0);
    }
};

const ThetaOneBaseline& theta_one() {
    static const ThetaOneBaseline b;
    return b;
}

Outcome oracle_equivalence() {
    const auto& b = theta_one();
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto& d = b.draws[i];
        const auto pol = solve_policy(d, b.cal.gamma0, b.p, b.c, b.probs, SolverConfig{});
        worst = std::max(worst, std::abs(pol.mu_b - oracle_policy(Branch::Busy, d, b.cal.gamma0, b.p, b.c, b.probs)));
        worst = std::max(worst, std::abs(pol.mu_i - oracle_policy(Branch::Idle, d, b.cal.gamma0, b.p, b.c, b.probs)));
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-6 && elapsed <= 60.0,
            "max |solver - oracle| = " + fmt(worst) + " over 1000 draws, gamma0 = " + fmt(b.cal.gamma0)};
}

Outcome constraint_satisfaction() {
    const auto& b = theta_one();
    const double power = average_power(b.cal.policies, b.p.p_d);
    return {std::abs(power - 1.0) <= 1e-3 && b.seconds <= 60.0,
            "average power = " + fmt(power) + " after " + std::to_string(b.cal.gamma_iters) +
                " gamma0 trials, calibration " + fmt(b.seconds) + " s"};
}

/// Bisection on X - H(X) over [0, H(0)] down to double resolution.
double bisect_root(const BranchModel& m, double g) {
    double lo = 0.0, hi = m.rhs(0.0, g);
    for (int k = 0; k < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++k) {
        const double mid = 0.5 * (lo + hi);
        (mid - m.rhs(mid, g) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome fixed_point_structure() {
    const auto& b = theta_one();
    const double g = b.cal.gamma0;
    const SolverConfig cfg;
    std::size_t branches = 0, draws_used = 0;
    int not_decreasing = 0, not_convex = 0, not_positive = 0;
    double worst_gap = 0.0;
    for (std::size_t i = 0; i < b.draws.size() && draws_used < 1000; ++i) {
        const BranchModel busy(Branch::Busy, b.draws[i], b.p, b.c, b.probs);
        const BranchModel idle(Branch::Idle, b.draws[i], b.p, b.c, b.probs);
        if (!busy.active(g) && !idle.active(g)) continue;
        ++draws_used;
        for (const BranchModel* m : {&busy, &idle}) {
            if (!m->active(g) || m->z_e <= 0.0) continue;
            ++branches;
            const double h0 = m->rhs(0.0, g);
            if (!(h0 > 0.0)) ++not_positive;
            constexpr int kSteps = 200;
            const double step = h0 / kSteps;
            for (int k = 1; k < kSteps; ++k) {
                const double x = k * step;
                const double left = m->rhs(x - step, g), mid = m->rhs(x, g), right = m->rhs(x + step, g);
                if (!(mid <= left + 1e-12 * h0)) ++not_decreasing;
                if (!(left + right - 2.0 * mid >= -1e-11 * h0)) ++not_convex;
            }
            worst_gap = std::max(worst_gap, std::abs(solve_branch(*m, g, cfg).mu - bisect_root(*m, g)));
        }
    }
    const bool ok = draws_used == 1000 && not_decreasing == 0 && not_convex == 0 && not_positive == 0 &&
                    worst_gap <= 1e-8;
    return {ok, std::to_string(draws_used) + " active draws (" + std::to_string(branches) +
                    " branches): decreasing violations " + std::to_string(not_decreasing) +
                    ", convexity violations " + std::to_string(not_convex) + ", H(0)<=0 " +
                    std::to_string(not_positive) + ", max |bisection - solver| = " + fmt(worst_gap)};
}

Outcome quadrature_cross_validation() {
    SystemParams p;
    p.theta = 0.01;
    p.snr = db_to_linear(10.0);
    const SolverConfig cfg;
    const auto draws = sample_fading(1, 100'000, p);
    const auto ev = evaluate_on(draws, p, cfg, 1);
    const double quad = quadrature_effective_capacity(ev.result.gamma0, p, cfg, 32);
    const double rel = std::abs(quad - ev.result.r_e) / ev.result.r_e;
    return {rel <= 5e-3, "Monte Carlo R_e = " + fmt(ev.result.r_e) + ", quadrature R_e = " + fmt(quad) +
                             ", relative gap = " + fmt(rel)};
}

Outcome iteration_counts() {
    const auto t0 = Clock::now();
    constexpr std::size_t n = 100'000;
    SystemParams p;
    p.snr = db_to_linear(10.0);
    p.theta = 1.0;
    const auto strict = iteration_histogram(p, SolverConfig{}, 1, n);
    SystemParams q = p;
    q.p_f = 0.2;
    q.p_d = 0.8;
    const auto other_sensing = iteration_histogram(q, SolverConfig{}, 1, n);
    p.theta = 0.01;
    const auto loose = iteration_histogram(p, SolverConfig{}, 1, n);

    const double below14 = strict.fraction_below(14);
    const double below5 = loose.fraction_below(5);
    const auto ks = ks_two_sample<int>(strict.per_draw, other_sensing.per_draw);
    const double elapsed = seconds_since(t0);
    const bool ok = below14 >= 0.8 && below5 >= 0.8 && ks.p_value > 0.01 && elapsed <= 300.0;
    return {ok, "theta=1: fraction < 14 iterations = " + fmt(below14) + " (need >= 0.8); theta=0.01: fraction < 5 = " +
                    fmt(below5) + " (need >= 0.8); KS (0.1,0.9) vs (0.2,0.8): D = " + fmt(ks.statistic) +
                    ", p = " + fmt(ks.p_value) + " (need > 0.01)"};
}

/// Every R_e produced by criteria 6-8 is also checked against the missed-detection cap.
struct CapTracker {
    int checked = 0;
    int violations = 0;
    void check(const SystemParams& p, double r_e) {
        ++checked;
        if (r_e > missed_detection_cap(p)) ++violations;
    }
};

CapTracker& cap_tracker() {
    static CapTracker t;
    return t;
}

std::vector<SweepRow> run_sweep(SweepAxis axis, std::vector<double> grid, const SystemParams& fixed) {
    SweepSpec spec;
    spec.axis = axis;
    spec.grid = std::move(grid);
    spec.fixed = fixed;
    auto rows = sweep(spec, SolverConfig{}, 1, 100'000);
    for (const auto& r : rows) {
        if (!r.ok) throw NumericalError("sweep point " + fmt(r.axis_value) + " failed: " + r.error);
        cap_tracker().check(r.params, r.result.r_e);
    }
    return rows;
}

Outcome theta_trend() {
    const std::vector<double> grid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
    SystemParams good;
    good.snr = db_to_linear(10.0);
    SystemParams poor = good;
    poor.p_f = 0.4;
    poor.p_d = 0.6;
    const auto a = run_sweep(SweepAxis::Theta, grid, good);
    const auto b = run_sweep(SweepAxis::Theta, grid, poor);
    bool monotone = true, ordered = true;
    std::ostringstream vals;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && a[i].result.r_e > a[i - 1].result.r_e) monotone = false;
        if (i > 0 && b[i].result.r_e > b[i - 1].result.r_e) monotone = false;
        if (a[i].result.r_e < b[i].result.r_e) ordered = false;
        vals << (i ? "; " : "") << fmt(grid[i]) << ": " << fmt(a[i].result.r_e) << " vs " << fmt(b[i].result.r_e);
    }
    return {monotone && ordered, std::string(monotone ? "" : "NOT ") + "non-increasing, " +
                                     (ordered ? "" : "NOT ") + "ordered; R_e(0.1,0.9) vs R_e(0.4,0.6) at theta " +
                                     vals.str()};
}

Outcome snr_saturation() {
    SystemParams p;
    p.theta = 0.1;
    const auto rows = run_sweep(SweepAxis::Snr, {0.0, 10.0, 20.0, 30.0}, p);
    const double r20 = rows[2].result.r_e, r30 = rows[3].result.r_e;
    const double growth = r30 - r20;
    const bool saturates = growth <= 0.05 * r20;
    const auto& cap = cap_tracker();
    return {saturates && cap.violations == 0,
            "R_e(20 dB) = " + fmt(r20) + ", R_e(30 dB) = " + fmt(r30) + ", growth = " + fmt(growth / r20 * 100.0) +
                "% (limit 5%); cap -ln(p_0)/(theta B T) = " + fmt(missed_detection_cap(rows[3].params)) +
                ", cap violations " + std::to_string(cap.violations) + "/" + std::to_string(cap.checked)};
}

Outcome hidden_terminal_crossing() {
    const std::vector<double> betas = {8.0, 16.0};
    SystemParams high_snr_poor_sensing;
    high_snr_poor_sensing.theta = 0.01;
    high_snr_poor_sensing.p_f = 0.5;
    high_snr_poor_sensing.p_d = 0.9;
    high_snr_poor_sensing.snr = db_to_linear(0.0);
    SystemParams low_snr_good_sensing = high_snr_poor_sensing;
    low_snr_good_sensing.p_f = 0.1;
    low_snr_good_sensing.snr = db_to_linear(-10.0);
    const auto a = run_sweep(SweepAxis::Beta, betas, high_snr_poor_sensing);
    const auto b = run_sweep(SweepAxis::Beta, betas, low_snr_good_sensing);
    bool ok = true;
    std::ostringstream vals;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(a[i].result.r_e < b[i].result.r_e)) ok = false;
        vals << (i ? "; " : "") << "beta=" << fmt(betas[i]) << ": " << fmt(a[i].result.r_e) << " < "
             << fmt(b[i].result.r_e);
    }
    return {ok, "R_e(P_f=0.5, 0 dB) vs R_e(P_f=0.1, -10 dB): " + vals.str()};
}

Outcome queue_tail_law() {
    const auto t0 = Clock::now();
    SystemParams p;
    p.theta = 0.01;
    p.snr = db_to_linear(10.0);
    const auto r = maximize_capacity(p, SolverConfig{}, 1, 100'000);
    SimConfig sc;
    sc.params = p;
    sc.n_frames = 1'000'000;
    sc.seed = 2;
    sc.policy = PolicySource::calibrated(r.gamma0);
    sc.arrival_rate = 0.95 * r.bits_per_frame(p);
    const auto res = simulate_queue(sc);
    const double elapsed = seconds_since(t0);

    const auto q = scenario_probabilities(p);
    double worst_z = 0.0;
    for (auto k : kAllScenarios) {
        const double pk = q[index_of(k)];
        const double n = static_cast<double>(sc.n_frames);
        const double se = std::sqrt(pk * (1.0 - pk) / n);
        worst_z = std::max(worst_z, std::abs(res.outages[index_of(k)].frames / n - pk) / se);
    }
    const double decay = res.decay_estimate.value_or(-1.0);
    const bool ok = res.decay_estimate && decay >= 0.9 * p.theta && res.security_outages() == 0 &&
                    worst_z <= 3.0 && !res.unstable && elapsed <= 300.0;
    return {ok, "arrival " + fmt(sc.arrival_rate) + " bits/frame, decay = " +
                    (res.decay_estimate ? fmt(decay) : res.decay_error) + " (need >= " + fmt(0.9 * p.theta) +
                    "), security outages = " + std::to_string(res.security_outages()) +
                    ", max scenario z-score = " + fmt(worst_z)};
}

int run_command(const std::string& cmd) {
    const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "crsec_acceptance_determinism";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const std::string cli = CRSEC_CLI_PATH;
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"sweep", "--sweep_axis theta --sweep_grid 0.001,0.01,0.1,1,10 --n_draws 20000 --seed 7"},
        {"sweep", "--sweep_axis sensing --sensing_pairs 0.1:0.9,0.2:0.8 --n_draws 20000 --seed 7 --threads 2"},
        {"eval", "--theta 0.01 --n_draws 20000 --seed 3"},
        {"iters", "--theta 1 --n_draws 10000 --seed 3"},
        {"simulate", "--theta 0.01 --n_draws 20000 --n_frames 50000 --seed 3 --sim_seed 4"},
    };
    int identical = 0;
    std::string failures;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::string outputs[2];
        bool ran = true;
        for (int rep = 0; rep < 2; ++rep) {
            const auto out = dir / ("run" + std::to_string(i) + "_" + std::to_string(rep) + ".csv");
            const int status =
                run_command(cli + " " + runs[i].first + " " + runs[i].second + " --output " + out.string());
            if (status != 0) ran = false;
            outputs[rep] = slurp(out);
        }
        if (ran && !outputs[0].empty() && outputs[0] == outputs[1])
            ++identical;
        else
            failures += " " + runs[i].first + "#" + std::to_string(i);
    }
    std::filesystem::remove_all(dir);
    const bool ok = identical == static_cast<int>(runs.size());
    return {ok, std::to_string(identical) + "/" + std::to_string(runs.size()) +
                    " CLI runs byte-identical across repeats" + (ok ? "" : "; differing:" + failures)};
}

}  // namespace

int main() {
    Report report;
    report.run(1, "oracle equivalence", oracle_equivalence);
    report.run(2, "interference constraint", constraint_satisfaction);
    report.run(3, "fixed-point structure", fixed_point_structure);
    report.run(4, "Monte Carlo vs quadrature", quadrature_cross_validation);
    report.run(5, "iteration counts", iteration_counts);
    report.run(6, "capacity vs theta", theta_trend);
    report.run(7, "SNR saturation", snr_saturation);
    report.run(8, "hidden-terminal crossing", hidden_terminal_crossing);
    report.run(9, "queue tail law", queue_tail_law);
    report.run(10, "determinism", determinism);
    std::cout << (10 - report.failures()) << "/10 criteria passed" << std::endl;
    return report.failures() == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
