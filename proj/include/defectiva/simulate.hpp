#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "defectiva/bdgd.hpp"
#include "defectiva/clayton.hpp"
#include "defectiva/dgompertz.hpp"
#include "defectiva/error.hpp"
#include "defectiva/random.hpp"

namespace defectiva {

struct Scenario {
    int id;
    BdgdParams params;
};

/// The twelve nominal parameter sets: phi in {1, 3, 10} crossed with four
/// (alpha, beta) patterns built from (1.0, 0.8) and (0.5, 1.5).
inline std::vector<Scenario> scenario_catalog() {
    const DGParams low_cure(1.0, 0.8);   // rho ~ 0.2865
    const DGParams high_cure(0.5, 1.5);  // rho ~ 0.7165
    const std::array<std::array<DGParams, 2>, 4> patterns{{
        {low_cure, low_cure},
        {high_cure, high_cure},
        {low_cure, high_cure},
        {high_cure, low_cure},
    }};
    std::vector<Scenario> out;
    int id = 1;
    for (double phi : {1.0, 3.0, 10.0})
        for (const auto& m : patterns) out.push_back({id++, BdgdParams(m[0], m[1], ClaytonPhi(phi))});
    return out;
}

inline Scenario scenario(int id) {
    if (id < 1 || id > 12) throw ConfigError("scenario id must be in 1..12");
    return scenario_catalog()[static_cast<std::size_t>(id - 1)];
}

/// How the cure status of margin 2 is tied to margin 1. `ratio` draws the
/// copy indicator with probability min(phi/(phi+1), 1 - 1e-9); `literal` uses
/// phi itself and is only defined for phi <= 1.
enum class MixingRule { ratio, literal };

/// How w is formed from (u1, u2). `inversion` works on the susceptible
/// subpopulations: with a = 1 - u1 / (1 - rho1) it solves
/// dC/du(a, v) = u2 / (1 - rho2) for v and sets w = (1 - rho2)(1 - v), so w is
/// uniform on (0, 1 - rho2) and the normalized survival levels of the two
/// latent times are Clayton-dependent. `kernel` evaluates dC/du(u1, u2)
/// directly and uses the value as the level.
enum class ConditionalRule { inversion, kernel };

struct GenConfig {
    BdgdParams params;
    std::size_t n = 100;
    std::uint64_t seed = 1;
    MixingRule mixing = MixingRule::ratio;
    std::optional<double> p_mix;  ///< explicit override of the copy probability
    int max_retries = 100;
    ConditionalRule conditional = ConditionalRule::inversion;
};

inline double mixing_probability(const GenConfig& c) {
    const double phi = c.params.phi().value();
    double p;
    if (c.p_mix) {
        p = *c.p_mix;
    } else if (c.mixing == MixingRule::literal) {
        if (phi > 1.0) throw ConfigError("literal mixing rule needs phi <= 1");
        p = phi;
    } else {
        p = std::min(phi / (phi + 1.0), 1.0 - 1e-9);
    }
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("mixing probability must lie in [0, 1]");
    return p;
}

/// Latent quantities of one subject, kept for instrumentation.
struct LatentSubject {
    bool susceptible1;  ///< M1
    bool susceptible2;  ///< M2
    bool copied;        ///< k: margin 2 takes margin 1's cure status
    double u1, u2, w;
    double latent_t1;   ///< t1*, +inf when cured
    double latent_t2;   ///< t2*, +inf when cured or w at the cap
    double censor1;     ///< u1*
    double censor2;     ///< u2*
};

struct Generated {
    Dataset data;
    std::vector<LatentSubject> latent;
    int retries = 0;
};

namespace detail {

inline double max_finite(const std::vector<LatentSubject>& subjects, double LatentSubject::*field) {
    double m = -1.0;
    for (const auto& s : subjects)
        if (std::isfinite(s.*field)) m = std::max(m, s.*field);
    return m;
}

/// One generation attempt. Each subject draws from its own stream
/// (seed, attempt, i), so the result does not depend on evaluation order.
inline std::optional<Generated> generate_attempt(const GenConfig& c, int attempt) {
    const BdgdParams& p = c.params;
    const ClaytonPhi phi = p.phi();
    const double cured1 = cure_rate(p.m1()), cured2 = cure_rate(p.m2());
    const double mass1 = susceptible_fraction(p.m1()), mass2 = susceptible_fraction(p.m2());
    const double p_mix = mixing_probability(c);
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double kTiny = std::numeric_limits<double>::min();
    const double kBelowOne = std::nextafter(1.0, 0.0);

    std::vector<LatentSubject> subjects(c.n);
    std::vector<Rng> streams;
    streams.reserve(c.n);
    for (std::size_t i = 0; i < c.n; ++i) {
        streams.emplace_back(derive_seed({c.seed, static_cast<std::uint64_t>(attempt), i}));
        Rng& rng = streams.back();
        LatentSubject& s = subjects[i];
        s.susceptible1 = rng.bernoulli(1.0 - cured1);
        s.u1 = rng.uniform(0.0, mass1);
        s.susceptible2 = rng.bernoulli(1.0 - cured2);
        s.u2 = rng.uniform(0.0, mass2);
        s.copied = rng.bernoulli(p_mix);

        s.latent_t1 = inf;
        if (s.susceptible1) {
            try {
                s.latent_t1 = inverse_cdf(p.m1(), s.u1);
            } catch (const DomainError&) {
            }
        }

        const double level =
            c.conditional == ConditionalRule::inversion
                ? mass2 * (1.0 - conditional_quantile_given_u(phi, std::max(1.0 - s.u1 / mass1, kTiny),
                                                               std::min(s.u2 / mass2, kBelowOne)))
                : conditional_given_u(phi, s.u1, s.u2);
        s.w = std::min(level, mass2);
        const bool susceptible = s.copied ? s.susceptible1 : s.susceptible2;
        s.latent_t2 = inf;
        if (susceptible) {
            try {
                s.latent_t2 = inverse_cdf(p.m2(), s.w);
            } catch (const DomainError&) {
                // w at the cap 1 - rho2: F2^-1 is unbounded there.
            }
        }
    }

    const double max1 = max_finite(subjects, &LatentSubject::latent_t1);
    const double max2 = max_finite(subjects, &LatentSubject::latent_t2);
    if (max1 <= 0.0 || max2 <= 0.0) return std::nullopt;

    std::vector<BivObs> obs(c.n);
    for (std::size_t i = 0; i < c.n; ++i) {
        LatentSubject& s = subjects[i];
        s.censor1 = streams[i].uniform(0.0, max1);
        s.censor2 = streams[i].uniform(0.0, max2);
        const bool d1 = s.latent_t1 < s.censor1;
        const bool d2 = s.latent_t2 < s.censor2;
        obs[i] = {d1 ? s.latent_t1 : s.censor1, d1 ? 1 : 0, d2 ? s.latent_t2 : s.censor2, d2 ? 1 : 0};
    }
    return Generated{Dataset(std::move(obs)), std::move(subjects), attempt};
}

}  // namespace detail

/// Right-censored bivariate sample with latent bookkeeping. A margin with no
/// finite latent time cannot set a censoring range, so the attempt is redrawn
/// from a fresh stream, up to `max_retries` times.
inline Generated generate_with_latent(const GenConfig& c) {
    if (c.n < 2) throw ConfigError("sample size must be at least 2");
    mixing_probability(c);
    for (int attempt = 0; attempt <= c.max_retries; ++attempt)
        if (auto g = detail::generate_attempt(c, attempt)) return std::move(*g);
    throw DataError("every generated sample was fully cured in at least one margin");
}

inline Dataset generate(const GenConfig& c) { return generate_with_latent(c).data; }

}  // namespace defectiva
