// Gauss–Laguerre tensor quadrature over the two exponential fading gains.
// Serves as a deterministic cross-check of the Monte Carlo sample means.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "crsec/fading.hpp"
#include "crsec/params.hpp"

namespace crsec {

/// Nodes and weights for  int_0^inf g(x) e^{-x} dx ~= sum w_k g(x_k).
struct LaguerreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Newton iteration on L_n with the usual asymptotic starting guesses.
inline LaguerreRule gauss_laguerre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be >= 1");
    LaguerreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double nd = n;
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i == 0) {
            z = 3.0 / (1.0 + 2.4 * nd);
        } else if (i == 1) {
            z += 15.0 / (1.0 + 2.5 * nd);
        } else {
            const double ai = i - 1;
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - rule.nodes[i - 2]);
        }
        double p1 = 0.0;
        double p2 = 0.0;
        double dp = 0.0;
        int iter = 0;
        for (; iter < 100; ++iter) {
            p1 = 1.0;
            p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0 - z) * p2 - (j - 1.0) * p3) / j;
            }
            // L_n'(z) = n (L_n(z) - L_{n-1}(z)) / z
            dp = nd * (p1 - p2) / z;
            const double z_prev = z;
            z = z_prev - p1 / dp;
            if (std::abs(z - z_prev) <= 1e-13 * z) break;
        }
        if (iter == 100) throw NumericalError("gauss_laguerre: Newton iteration did not converge");
        rule.nodes[i] = z;
        rule.weights[i] = -1.0 / (dp * nd * p2);
    }
    return rule;
}

/// E[h(z_m, z_e)] for z_m ~ Exp(mean sigma2_m), z_e ~ Exp(mean sigma2_e), with
/// z_e pinned to 0 when sigma2_e = 0.
template <class Fn>
double expect_over_fading(const SystemParams& p, const LaguerreRule& rule, Fn&& h) {
    double total = 0.0;
    const std::size_t n = rule.nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double zm = p.sigma2_m * rule.nodes[i];
        if (p.sigma2_e <= 0.0) {
            total += rule.weights[i] * h(FadingDraw{zm, 0.0});
            continue;
        }
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            inner += rule.weights[j] * h(FadingDraw{zm, p.sigma2_e * rule.nodes[j]});
        total += rule.weights[i] * inner;
    }
    return total;
}

/// E[h(z_m, z_e) ; z_m > offset + slope * z_e]. Substituting
/// z_m = offset + slope * z_e + w maps the region onto the quadrant w, z_e >= 0,
/// where the joint density stays exponential in both variables:
///   e^{-offset/s_m} (tau/s_e) int int h(...) e^{-w/s_m} e^{-z_e/tau} / s_m
/// with 1/tau = slope/s_m + 1/s_e. Integrands that jump to a constant across the
/// boundary are then integrated from their smooth side only.
template <class Fn>
double expect_over_region(const SystemParams& p, const LaguerreRule& rule, double offset,
                          double slope, Fn&& h) {
    if (offset < 0.0 || slope < 0.0)
        throw std::invalid_argument("expect_over_region: offset and slope must be >= 0");
    const double sm = p.sigma2_m;
    const double scale = std::exp(-offset / sm);
    const std::size_t n = rule.nodes.size();
    if (p.sigma2_e <= 0.0) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            total += rule.weights[i] * h(FadingDraw{offset + sm * rule.nodes[i], 0.0});
        return scale * total;
    }
    const double se = p.sigma2_e;
    const double tau = 1.0 / (slope / sm + 1.0 / se);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double ze = tau * rule.nodes[j];
        double inner = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            inner += rule.weights[i] * h(FadingDraw{offset + slope * ze + sm * rule.nodes[i], ze});
        total += rule.weights[j] * inner;
    }
    return scale * (tau / se) * total;
}

}  // namespace crsec
