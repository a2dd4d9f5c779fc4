// Iteration-count histograms for the power-control iteration and a two-sample
// Kolmogorov–Smirnov test to compare them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "crsec/capacity.hpp"

namespace crsec {

struct IterationHistogram {
    std::vector<int> per_draw;            // max(iters_b, iters_i) per draw
    std::vector<std::size_t> counts;      // counts[k] = draws needing k evaluations
    double gamma0 = 0.0;

    double probability(std::size_t k) const {
        return k < counts.size() ? static_cast<double>(counts[k]) / per_draw.size() : 0.0;
    }
    /// Fraction of draws converging in strictly fewer than k evaluations.
    double fraction_below(int k) const {
        const auto n = std::count_if(per_draw.begin(), per_draw.end(), [k](int v) { return v < k; });
        return static_cast<double>(n) / static_cast<double>(per_draw.size());
    }
};

inline IterationHistogram iteration_histogram(const SystemParams& p, const SolverConfig& cfg,
                                              std::uint64_t seed, std::size_t n) {
    if (n < 10'000) throw std::invalid_argument("iteration_histogram: n must be >= 10^4");
    const auto draws = sample_fading(seed, n, p);
    const auto ev = evaluate_on(draws, p, cfg, seed);
    IterationHistogram h;
    h.gamma0 = ev.result.gamma0;
    h.per_draw.reserve(n);
    for (const auto& pol : ev.calibration.policies) {
        const int k = std::max(pol.iters_b, pol.iters_i);
        h.per_draw.push_back(k);
        if (static_cast<std::size_t>(k) >= h.counts.size()) h.counts.resize(k + 1, 0);
        ++h.counts[k];
    }
    return h;
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov survival function Q(x) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 x^2}.
inline double kolmogorov_q(double x) {
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * x * x);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample KS test with the asymptotic p-value (Stephens' small-sample
/// correction). Ties are handled by evaluating both ECDFs after each distinct value.
template <class T>
KsResult ks_two_sample(std::span<const T> a, std::span<const T> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<T> x(a.begin(), a.end());
    std::vector<T> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const T v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(i / nx - j / ny));
    }
    const double en = std::sqrt(nx * ny / (nx + ny));
    return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

}  // namespace crsec
