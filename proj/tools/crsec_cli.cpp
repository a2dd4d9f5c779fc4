// crsec: batch front-end for effective secure capacity experiments.
//
//   crsec <eval|sweep|iters|simulate|selftest> [--config run.cfg] [--<key> value ...]
//
// Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "crsec/crsec.hpp"

namespace {

using namespace crsec;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

/// Output files are rendered in memory first and written once, so a failed run
/// never leaves a partial CSV behind.
class OutputSet {
public:
    explicit OutputSet(std::string csv_path) : csv_path_(std::move(csv_path)) {
        // Fail before any computation if the path is unwritable, without
        // leaving an empty file behind.
        const bool existed = std::filesystem::exists(csv_path_);
        {
            std::ofstream probe(csv_path_, std::ios::app);
            if (!probe) throw ConfigError("cannot write output '" + csv_path_ + "'");
        }
        if (!existed) std::filesystem::remove(csv_path_);
    }
    std::ostringstream& csv() { return csv_; }
    std::ostringstream& sidecar(const std::string& suffix) { return sidecars_[suffix]; }

    void flush() const {
        write(csv_path_, csv_.str());
        for (const auto& [suffix, body] : sidecars_) write(csv_path_ + suffix, body.str());
    }

private:
    static void write(const std::string& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write output '" + path + "'");
        out << body;
        if (!out) throw ConfigError("failed while writing '" + path + "'");
    }

    std::string csv_path_;
    std::ostringstream csv_;
    std::map<std::string, std::ostringstream> sidecars_;
};

int run_eval(const RunConfig& rc) {
    OutputSet out(rc.output_path);
    const auto r = maximize_capacity(rc.params, rc.solver, rc.seed, rc.n_draws);
    out.csv() << "r_e_bits_s_hz,r_e_bits_frame,gamma0,ergodic_rate_bits_s_hz,achieved_power,"
                 "mean_iters_b,mean_iters_i,n_draws,seed\n"
              << format_sig9(r.r_e) << ',' << format_sig9(r.bits_per_frame(rc.params)) << ','
              << format_sig9(r.gamma0) << ',' << format_sig9(r.ergodic_rate) << ','
              << format_sig9(r.achieved_power) << ',' << format_sig9(r.mean_iters_b) << ','
              << format_sig9(r.mean_iters_i) << ',' << r.n_draws << ',' << r.seed << '\n';
    write_metadata(out.sidecar(".meta"), rc);
    out.flush();
    std::cout << "R_e = " << format_sig9(r.r_e) << " bits/s/Hz, gamma0 = " << format_sig9(r.gamma0)
              << ", ergodic = " << format_sig9(r.ergodic_rate) << '\n';
    return kExitOk;
}

int run_sweep(const RunConfig& rc) {
    OutputSet out(rc.output_path);
    const auto rows = sweep(*rc.sweep, rc.solver, rc.seed, rc.n_draws);
    write_sweep_csv(out.csv(), rows);
    KeyValues extra;
    int failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ok) continue;
        ++failures;
        extra["failure." + std::to_string(i)] = rows[i].error;
        std::cerr << "sweep point " << format_sig9(rows[i].axis_value) << " failed: " << rows[i].error
                  << '\n';
    }
    write_metadata(out.sidecar(".meta"), rc, extra);
    out.flush();
    std::cout << "wrote " << rows.size() << " sweep rows to " << rc.output_path << '\n';
    return failures == 0 ? kExitOk : kExitNumerical;
}

int run_iters(const RunConfig& rc) {
    OutputSet out(rc.output_path);
    const auto h = iteration_histogram(rc.params, rc.solver, rc.seed, rc.n_draws);
    out.csv() << "iterations,count,probability\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k)
        out.csv() << k << ',' << h.counts[k] << ',' << format_sig9(h.probability(k)) << '\n';
    write_metadata(out.sidecar(".meta"), rc,
                   {{"result.gamma0", format_sig9(h.gamma0)},
                    {"result.fraction_below_5", format_sig9(h.fraction_below(5))},
                    {"result.fraction_below_14", format_sig9(h.fraction_below(14))}});
    out.flush();
    std::cout << "fraction < 5 iterations: " << format_sig9(h.fraction_below(5))
              << ", < 14: " << format_sig9(h.fraction_below(14)) << '\n';
    return kExitOk;
}

int run_simulate(const RunConfig& rc) {
    OutputSet out(rc.output_path);
    const auto r = maximize_capacity(rc.params, rc.solver, rc.seed, rc.n_draws);
    SimConfig sim = *rc.sim;
    sim.policy = PolicySource::calibrated(r.gamma0);
    sim.arrival_rate = rc.arrival_rate.value_or(rc.arrival_fraction * r.bits_per_frame(rc.params));
    const auto res = simulate_queue(sim);

    out.csv() << "q_threshold_bits,tail_probability\n";
    for (const auto& t : res.queue_tail)
        out.csv() << format_sig9(t.q) << ',' << format_sig9(t.probability) << '\n';

    auto& summary = out.sidecar(".summary");
    summary << "r_e_bits_s_hz=" << format_sig9(r.r_e) << '\n'
            << "gamma0=" << format_sig9(r.gamma0) << '\n'
            << "arrival_rate_bits_frame=" << format_sig9(sim.arrival_rate) << '\n'
            << "decay_estimate="
            << (res.decay_estimate ? format_sig9(*res.decay_estimate) : std::string("nan")) << '\n'
            << "decay_error=" << res.decay_error << '\n'
            << "mean_service_bits_frame=" << format_sig9(res.mean_service) << '\n'
            << "unstable=" << (res.unstable ? 1 : 0) << '\n'
            << "final_queue_bits=" << format_sig9(res.final_queue) << '\n';
    for (auto k : kAllScenarios) {
        const auto& t = res.outages[index_of(k)];
        const std::string prefix = "scenario" + std::to_string(static_cast<int>(k)) + ".";
        summary << prefix << "frames=" << t.frames << '\n'
                << prefix << "reliability_outages=" << t.reliability_outages << '\n'
                << prefix << "security_outages=" << t.security_outages << '\n';
    }
    write_metadata(out.sidecar(".meta"), rc);
    out.flush();
    std::cout << "decay estimate = "
              << (res.decay_estimate ? format_sig9(*res.decay_estimate) : res.decay_error)
              << " (theta = " << format_sig9(rc.params.theta) << ")"
              << (res.unstable ? ", queue UNSTABLE" : "") << '\n';
    return kExitOk;
}

int run_selftest(const RunConfig& rc) {
    const auto checks = crsec::run_selftest(rc.solver.threads);
    int failed = 0;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        if (!c.passed) ++failed;
    }
    std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective secure capacity of a cognitive-radio wiretap channel"};
    std::string command;
    std::string config_path;
    app.add_option("command", command, "eval | sweep | iters | simulate | selftest")
        ->required()
        ->check(CLI::IsMember({"eval", "sweep", "iters", "simulate", "selftest"}));
    app.add_option("--config", config_path, "flat key = value configuration file");
    std::map<std::string, std::string> flag_storage;
    std::map<std::string, CLI::Option*> flag_options;
    for (const auto& spec : config_keys()) {
        const std::string name = spec.name;
        flag_options[name] = app.add_option("--" + name, flag_storage[name], spec.help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        KeyValues file_values;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
            file_values = parse_key_values(in, config_path);
        }
        KeyValues flags;
        for (const auto& [name, opt] : flag_options)
            if (opt->count() > 0) flags[name] = flag_storage[name];

        const RunConfig rc = resolve_config(parse_command(command), file_values, flags);
        switch (rc.command) {
            case Command::Eval: return run_eval(rc);
            case Command::Sweep: return run_sweep(rc);
            case Command::Iters: return run_iters(rc);
            case Command::Simulate: return run_simulate(rc);
            case Command::Selftest: return run_selftest(rc);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}
