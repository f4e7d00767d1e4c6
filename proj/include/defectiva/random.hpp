#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace defectiva {

/// splitmix64 finalizer; used to turn structured keys into independent seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a stream seed from a root seed and a path of indices, e.g.
/// (seed, scenario, n, replicate). Order matters.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto k : keys) h = mix64(h ^ mix64(k));
    return h;
}

/// Seedable 64-bit generator. Variates are produced from raw engine bits so
/// streams are reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal, Marsaglia polar method (no cached second value).
    double normal() {
        for (;;) {
            const double x = 2.0 * uniform() - 1.0;
            const double y = 2.0 * uniform() - 1.0;
            const double s = x * x + y * y;
            if (s > 0.0 && s < 1.0) return x * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace defectiva
