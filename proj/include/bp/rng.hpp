#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bp {

/// Derive an independent stream seed from a base seed and a tag.
/// SplitMix64 finalizer; cheap and well distributed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic RNG used everywhere in the simulator. All draws go
/// through explicit methods here (never distribution objects, whose
/// output is implementation-defined) so results are stable across
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Log-uniform in [lo, hi), lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Uniform integer in [0, n). Modulo bias is irrelevant at our n.
    std::uint64_t bounded(std::uint64_t n) { return eng_() % n; }

    /// Standard normal (Box-Muller, pair cached).
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // (0,1] to keep log finite
        double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// +1 or -1 with equal probability.
    int pm_one() { return (eng_() >> 63) ? 1 : -1; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace bp
