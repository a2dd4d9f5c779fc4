#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "crsec/fading.hpp"
#include "crsec/quadrature.hpp"

using namespace crsec;

TEST(GaussLaguerre, TwoPointRule) {
    const auto r = gauss_laguerre(2);
    EXPECT_NEAR(r.nodes[0], 2.0 - std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(r.nodes[1], 2.0 + std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(r.weights[0], (2.0 + std::sqrt(2.0)) / 4.0, 1e-14);
    EXPECT_NEAR(r.weights[1], (2.0 - std::sqrt(2.0)) / 4.0, 1e-14);
}

TEST(GaussLaguerre, IntegratesMomentsExactly) {
    // int_0^inf x^k e^{-x} dx = k!
    for (int n : {4, 8, 16, 32}) {
        const auto r = gauss_laguerre(n);
        double factorial = 1.0;
        for (int k = 0; k < std::min(2 * n, 20); ++k) {
            if (k > 0) factorial *= k;
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += r.weights[i] * std::pow(r.nodes[i], k);
            EXPECT_NEAR(sum / factorial, 1.0, 1e-10) << "n=" << n << " k=" << k;
        }
    }
}

TEST(GaussLaguerre, NodesIncreasingWeightsPositive) {
    const auto r = gauss_laguerre(32);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        EXPECT_GT(r.weights[i], 0.0);
        if (i > 0) {
            EXPECT_GT(r.nodes[i], r.nodes[i - 1]);
        }
    }
    EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 1.0, 1e-13);
    EXPECT_THROW(gauss_laguerre(0), std::invalid_argument);
}

TEST(ExpectOverFading, SmoothIntegrands) {
    SystemParams p;
    p.sigma2_m = 2.0;
    p.sigma2_e = 0.5;
    const auto r = gauss_laguerre(32);
    EXPECT_NEAR(expect_over_fading(p, r, [](const FadingDraw& d) { return d.z_m * d.z_e; }), 1.0, 1e-12);
    // E[e^{-z_m}] = 1/(1 + sigma2_m)
    EXPECT_NEAR(expect_over_fading(p, r, [](const FadingDraw& d) { return std::exp(-d.z_m); }),
                1.0 / 3.0, 1e-10);
    p.sigma2_e = 0.0;
    EXPECT_NEAR(expect_over_fading(p, r, [](const FadingDraw& d) { return d.z_m + d.z_e; }), 2.0, 1e-12);
}

TEST(ExpectOverRegion, RegionProbabilityClosedForm) {
    // Pr(z_m > a + b z_e) = e^{-a/s_m} / (1 + b s_e / s_m)
    SystemParams p;
    p.sigma2_m = 1.5;
    p.sigma2_e = 0.7;
    const auto r = gauss_laguerre(32);
    for (double a : {0.0, 0.3, 2.0})
        for (double b : {0.0, 1.0, 2.0}) {
            const double expect = std::exp(-a / p.sigma2_m) / (1.0 + b * p.sigma2_e / p.sigma2_m);
            EXPECT_NEAR(expect_over_region(p, r, a, b, [](const FadingDraw&) { return 1.0; }), expect, 1e-13);
        }
}

TEST(ExpectOverRegion, AgreesWithMonteCarlo) {
    SystemParams p;
    const auto r = gauss_laguerre(32);
    const double a = 0.2, b = 2.0;
    auto h = [&](const FadingDraw& d) { return std::log1p(d.z_m) - std::log1p(d.z_e); };
    const double quad = expect_over_region(p, r, a, b, h);
    double sum = 0.0, sum2 = 0.0;
    const auto draws = sample_fading(77, 1'000'000, p);
    for (const auto& d : draws) {
        const double v = d.z_m > a + b * d.z_e ? h(d) : 0.0;
        sum += v;
        sum2 += v * v;
    }
    const double n = static_cast<double>(draws.size());
    const double mc = sum / n;
    const double se = std::sqrt((sum2 / n - mc * mc) / n);
    EXPECT_NEAR(quad, mc, 4.0 * se);
}

TEST(ExpectOverRegion, DegenerateEavesdropper) {
    SystemParams p;
    p.sigma2_e = 0.0;
    const auto r = gauss_laguerre(16);
    EXPECT_NEAR(expect_over_region(p, r, 1.0, 3.0, [](const FadingDraw&) { return 1.0; }),
                std::exp(-1.0), 1e-14);
    EXPECT_THROW(expect_over_region(p, r, -1.0, 0.0, [](const FadingDraw&) { return 1.0; }),
                 std::invalid_argument);
}
