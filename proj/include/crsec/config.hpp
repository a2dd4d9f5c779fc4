// Flat key = value run configuration for the batch front-end.
//
// Resolution order: built-in defaults, then the config file, then command-line
// flags of the same name. Every key is known in advance; anything else is an error.
#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsec/capacity.hpp"
#include "crsec/params.hpp"
#include "crsec/power_solver.hpp"
#include "crsec/queue_sim.hpp"

namespace crsec {

inline constexpr const char* kToolVersion = "1.0.0";

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Command { Eval, Sweep, Iters, Simulate, Selftest };

inline Command parse_command(const std::string& s) {
    if (s == "eval") return Command::Eval;
    if (s == "sweep") return Command::Sweep;
    if (s == "iters") return Command::Iters;
    if (s == "simulate") return Command::Simulate;
    if (s == "selftest") return Command::Selftest;
    throw ConfigError("unknown command '" + s + "' (eval|sweep|iters|simulate|selftest)");
}

inline std::string to_string(Command c) {
    switch (c) {
        case Command::Eval: return "eval";
        case Command::Sweep: return "sweep";
        case Command::Iters: return "iters";
        case Command::Simulate: return "simulate";
        case Command::Selftest: return "selftest";
    }
    return "?";
}

using KeyValues = std::map<std::string, std::string>;

struct KeySpec {
    const char* name;
    const char* default_value;
    const char* help;
};

// clang-format off
inline const std::vector<KeySpec>& config_keys() {
    static const std::vector<KeySpec> keys = {
        {"rho", "0.1", "PU-active probability per frame"},
        {"p_d", "0.9", "detection probability"},
        {"p_f", "0.1", "false-alarm probability"},
        {"sigma2_nm", "1", "noise variance at the legitimate receiver"},
        {"sigma2_ne", "1", "noise variance at the eavesdropper"},
        {"sigma2_sm", "1", "PU interference power at the legitimate receiver"},
        {"sigma2_se", "1", "PU interference power at the eavesdropper"},
        {"sigma2_m", "1", "main-channel fading variance"},
        {"sigma2_e", "1", "eavesdropper-channel fading variance"},
        {"bandwidth_B", "100", "bandwidth in Hz"},
        {"frame_T", "1", "frame duration in seconds"},
        {"snr_db", "10", "SNR in dB"},
        {"theta", "1", "QoS exponent in 1/bits"},
        {"seed", "1", "base seed of the fading draw set"},
        {"n_draws", "100000", "Monte Carlo draws"},
        {"threads", "1", "worker threads (results do not depend on it)"},
        {"fp_tolerance", "1e-8", "power iteration tolerance"},
        {"max_fp_iters", "500", "power iteration cap"},
        {"gamma_tolerance", "1e-4", "allowed |average power - 1|"},
        {"max_gamma_iters", "200", "gamma0 trial cap"},
        {"gamma_low", "1e-6", "initial gamma0 bracket, low end"},
        {"gamma_high", "1e3", "initial gamma0 bracket, high end"},
        {"output", "crsec_out.csv", "CSV output path"},
        {"sweep_axis", "theta", "theta|snr|beta|sensing"},
        {"sweep_grid", "", "comma-separated grid (snr in dB); empty for sensing uses pair indices"},
        {"sensing_pairs", "", "P_f:P_d pairs, comma-separated, for the sensing axis"},
        {"n_frames", "1000000", "simulated frames"},
        {"arrival_rate", "", "bits/frame; empty = arrival_fraction * R_e * B * T"},
        {"arrival_fraction", "0.95", "arrival as a fraction of the effective capacity"},
        {"sim_seed", "2", "seed of the simulated frame sequence"},
        {"warmup_fraction", "0.1", "fraction of frames discarded before tail collection"},
        {"tail_points", "50", "queue tail thresholds"},
    };
    return keys;
}
// clang-format on

inline bool is_config_key(const std::string& k) {
    for (const auto& spec : config_keys())
        if (k == spec.name) return true;
    return false;
}

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace detail

/// Parses `key = value` lines; '#' starts a comment. Unknown or duplicate keys
/// and malformed lines are errors reported with their line number.
inline KeyValues parse_key_values(std::istream& in, const std::string& source = "config") {
    KeyValues out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!is_config_key(key)) throw ConfigError(where + ": unknown config key '" + key + "'");
        if (out.count(key)) throw ConfigError(where + ": duplicate config key '" + key + "'");
        out[key] = value;
    }
    return out;
}

struct RunConfig {
    Command command = Command::Eval;
    SystemParams params;
    SolverConfig solver;
    std::optional<SweepSpec> sweep;
    std::optional<SimConfig> sim;
    std::optional<double> arrival_rate;  // unset: derived from R_e
    double arrival_fraction = 0.95;
    std::string output_path;
    std::uint64_t seed = 1;
    std::size_t n_draws = 100000;
    KeyValues resolved;  // every key with its final textual value
};

namespace detail {

inline double to_double(const KeyValues& kv, const std::string& key) {
    const std::string& s = kv.at(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
    }
}

inline std::uint64_t to_uint(const KeyValues& kv, const std::string& key) {
    const std::string& s = kv.at(key);
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + s +
                          "'");
    }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::vector<double> parse_grid(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) {
        KeyValues tmp{{key, item}};
        out.push_back(to_double(tmp, key));
    }
    return out;
}

}  // namespace detail

/// Builds a validated RunConfig. `file` and `flags` hold raw strings; flags win.
inline RunConfig resolve_config(Command command, const KeyValues& file, const KeyValues& flags) {
    KeyValues kv;
    for (const auto& spec : config_keys()) kv[spec.name] = spec.default_value;
    for (const auto* layer : {&file, &flags}) {
        for (const auto& [k, v] : *layer) {
            if (!is_config_key(k)) throw ConfigError("unknown config key '" + k + "'");
            kv[k] = v;
        }
    }
    using detail::to_double;
    using detail::to_uint;

    RunConfig rc;
    rc.command = command;
    rc.resolved = kv;
    auto& p = rc.params;
    p.rho = to_double(kv, "rho");
    p.p_d = to_double(kv, "p_d");
    p.p_f = to_double(kv, "p_f");
    p.sigma2_nm = to_double(kv, "sigma2_nm");
    p.sigma2_ne = to_double(kv, "sigma2_ne");
    p.sigma2_sm = to_double(kv, "sigma2_sm");
    p.sigma2_se = to_double(kv, "sigma2_se");
    p.sigma2_m = to_double(kv, "sigma2_m");
    p.sigma2_e = to_double(kv, "sigma2_e");
    p.bandwidth_B = to_double(kv, "bandwidth_B");
    p.frame_T = to_double(kv, "frame_T");
    p.snr = db_to_linear(to_double(kv, "snr_db"));
    p.theta = to_double(kv, "theta");
    try {
        validate(p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid parameters: ") + e.what());
    }

    auto& s = rc.solver;
    s.fp_tolerance = to_double(kv, "fp_tolerance");
    s.max_fp_iters = static_cast<int>(to_uint(kv, "max_fp_iters"));
    s.gamma_tolerance = to_double(kv, "gamma_tolerance");
    s.max_gamma_iters = static_cast<int>(to_uint(kv, "max_gamma_iters"));
    s.gamma_low = to_double(kv, "gamma_low");
    s.gamma_high = to_double(kv, "gamma_high");
    s.threads = static_cast<unsigned>(to_uint(kv, "threads"));
    try {
        validate(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid solver settings: ") + e.what());
    }

    rc.seed = to_uint(kv, "seed");
    rc.n_draws = to_uint(kv, "n_draws");
    if (rc.n_draws == 0) throw ConfigError("config key 'n_draws' must be >= 1");
    rc.output_path = kv.at("output");
    if (rc.output_path.empty()) throw ConfigError("config key 'output' must name a file");

    if (command == Command::Sweep) {
        SweepSpec spec;
        spec.axis = parse_sweep_axis(kv.at("sweep_axis"));
        spec.fixed = p;
        if (spec.axis == SweepAxis::Sensing) {
            for (const auto& pair : detail::split(kv.at("sensing_pairs"), ',')) {
                const auto parts = detail::split(pair, ':');
                if (parts.size() != 2)
                    throw ConfigError("config key 'sensing_pairs': expected P_f:P_d, got '" + pair + "'");
                KeyValues tmp{{"sensing_pairs", parts[0]}};
                const double pf = to_double(tmp, "sensing_pairs");
                tmp["sensing_pairs"] = parts[1];
                spec.sensing_pairs.emplace_back(pf, to_double(tmp, "sensing_pairs"));
            }
            spec.grid = detail::parse_grid("sweep_grid", kv.at("sweep_grid"));
            if (spec.grid.empty())
                for (std::size_t i = 0; i < spec.sensing_pairs.size(); ++i) spec.grid.push_back(i);
        } else {
            spec.grid = detail::parse_grid("sweep_grid", kv.at("sweep_grid"));
        }
        try {
            validate(spec);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid sweep: ") + e.what());
        }
        rc.sweep = std::move(spec);
    }

    if (command == Command::Simulate) {
        SimConfig sim;
        sim.params = p;
        sim.solver = s;
        sim.n_frames = to_uint(kv, "n_frames");
        sim.seed = to_uint(kv, "sim_seed");
        sim.warmup_fraction = to_double(kv, "warmup_fraction");
        sim.tail_points = static_cast<int>(to_uint(kv, "tail_points"));
        if (sim.n_frames < 10'000) throw ConfigError("config key 'n_frames' must be >= 10000");
        if (!(sim.warmup_fraction >= 0.0 && sim.warmup_fraction < 1.0))
            throw ConfigError("config key 'warmup_fraction' must lie in [0,1)");
        if (sim.tail_points < 2) throw ConfigError("config key 'tail_points' must be >= 2");
        if (!kv.at("arrival_rate").empty()) {
            rc.arrival_rate = to_double(kv, "arrival_rate");
            if (!(*rc.arrival_rate >= 0.0)) throw ConfigError("config key 'arrival_rate' must be >= 0");
        }
        rc.arrival_fraction = to_double(kv, "arrival_fraction");
        if (!(rc.arrival_fraction >= 0.0))
            throw ConfigError("config key 'arrival_fraction' must be >= 0");
        rc.sim = sim;
    }
    if (command == Command::Iters && rc.n_draws < 10'000)
        throw ConfigError("iters needs n_draws >= 10000");
    return rc;
}

/// Metadata sidecar: one `key=value` per line, tool identity first, then every
/// resolved configuration key in lexical order, then any extra records.
inline void write_metadata(std::ostream& os, const RunConfig& rc, const KeyValues& extra = {}) {
    os << "tool=crsec\n";
    os << "version=" << kToolVersion << '\n';
    os << "command=" << to_string(rc.command) << '\n';
    for (const auto& [k, v] : rc.resolved) os << "config." << k << '=' << v << '\n';
    for (const auto& [k, v] : extra) os << k << '=' << v << '\n';
}

}  // namespace crsec
