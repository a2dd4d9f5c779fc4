// Reproducible Rayleigh block-fading draws.
//
// Uniforms come from a counter-based generator: the value at (seed, stream, index)
// is a pure function of its key, so any sub-range of a sequence can be produced
// independently and sweeps can share or split streams without coordinating state.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "crsec/params.hpp"

namespace crsec {

/// Squared fading magnitudes |h_m|^2 and |h_e|^2 of one frame.
struct FadingDraw {
    double z_m = 0.0;
    double z_e = 0.0;
};

/// Stream identifiers keep independent consumers of one seed disjoint.
enum class Stream : std::uint64_t {
    Fading = 0x1,
    Scenario = 0x2,
    SimFading = 0x3,
};

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, Stream stream = Stream::Fading)
        : key_(mix(seed ^ mix(static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ULL))) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return mix(key_ + mix(counter + 0xD1B54A32D192ED03ULL));
    }

    /// Uniform on the open interval (0, 1); never returns 0 so -log(u) is finite.
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    // SplitMix64 finalizer.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t key_;
};

/// Draw number `index` of a Rayleigh fading sequence: exponential z_m, z_e with
/// means sigma2_m, sigma2_e via inverse CDF.
inline FadingDraw fading_at(const CounterRng& rng, std::uint64_t index, const SystemParams& p) {
    FadingDraw d;
    d.z_m = -p.sigma2_m * std::log(rng.uniform(2 * index));
    d.z_e = p.sigma2_e > 0.0 ? -p.sigma2_e * std::log(rng.uniform(2 * index + 1)) : 0.0;
    return d;
}

inline std::vector<FadingDraw> sample_fading(std::uint64_t seed, std::size_t n, const SystemParams& p,
                                             Stream stream = Stream::Fading) {
    if (n == 0) throw std::invalid_argument("sample_fading: n must be >= 1");
    const CounterRng rng(seed, stream);
    std::vector<FadingDraw> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fading_at(rng, i, p);
    return out;
}

}  // namespace crsec
