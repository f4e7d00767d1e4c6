#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>

#include "defectiva/error.hpp"
#include "defectiva/quadrature.hpp"

// Clayton copula C(u,v) = (u^-phi + v^-phi - 1)^(-1/phi), used both as the
// survival copula joining S1 and S2 and as the copula inside Spearman's
// integral. Clayton is exchangeable, so the two roles share one expression.
//
// Everything is evaluated from log u and log v: for phi = 10 and small u the
// direct power chain overflows long before the result does.
namespace defectiva {

class ClaytonPhi {
public:
    explicit ClaytonPhi(double phi) : phi_(phi) {
        if (!(phi > 0.0 && std::isfinite(phi))) throw DomainError("ClaytonPhi: phi must be positive and finite");
    }

    double value() const noexcept { return phi_; }

    friend bool operator==(const ClaytonPhi&, const ClaytonPhi&) = default;

private:
    double phi_;
};

/// Copula arguments on the log scale, log_u, log_v <= 0.
struct LogMargins {
    double log_u;
    double log_v;
};

namespace detail {

/// log(u^-phi + v^-phi - 1) from log u, log v.
inline double log_clayton_sum(double phi, LogMargins m) {
    const double a = -phi * m.log_u;
    const double b = -phi * m.log_v;
    const double hi = std::max(a, b);
    if (hi < 1.0) return std::log1p(std::expm1(a) + std::expm1(b));
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi) - std::exp(-hi));
}

inline void check_log_margins(LogMargins m) {
    if (!(m.log_u <= 0.0 && m.log_v <= 0.0) || std::isinf(m.log_u) || std::isinf(m.log_v))
        throw DomainError("copula arguments must lie in (0, 1]");
}

inline void check_closed(double u, double v) {
    if (!(u > 0.0 && u <= 1.0 && v > 0.0 && v <= 1.0)) throw DomainError("copula arguments must lie in (0, 1]");
}

inline void check_open(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) throw DomainError("copula arguments must lie in (0, 1)");
}

}  // namespace detail

inline double log_joint_survival(ClaytonPhi phi, LogMargins m) {
    detail::check_log_margins(m);
    return -detail::log_clayton_sum(phi.value(), m) / phi.value();
}

inline double joint_survival(ClaytonPhi phi, double u, double v) {
    detail::check_closed(u, v);
    return std::exp(log_joint_survival(phi, {std::log(u), std::log(v)}));
}

/// log of (1+phi) (uv)^(-1-phi) (u^-phi + v^-phi - 1)^(-2-1/phi), the mixed
/// partial d2C/du dv.
inline double log_copula_density_factor(ClaytonPhi phi, LogMargins m) {
    detail::check_log_margins(m);
    const double f = phi.value();
    return std::log1p(f) - (1.0 + f) * (m.log_u + m.log_v) - (2.0 + 1.0 / f) * detail::log_clayton_sum(f, m);
}

inline double copula_density_factor(ClaytonPhi phi, double u, double v) {
    detail::check_open(u, v);
    return std::exp(log_copula_density_factor(phi, {std::log(u), std::log(v)}));
}

/// log dC/du = -(phi+1) log u - (1 + 1/phi) log(u^-phi + v^-phi - 1); as a
/// function of v this is the conditional CDF of V given U = u.
inline double log_conditional_given_u(ClaytonPhi phi, LogMargins m) {
    detail::check_log_margins(m);
    const double f = phi.value();
    return -(f + 1.0) * m.log_u - (1.0 + 1.0 / f) * detail::log_clayton_sum(f, m);
}

inline double conditional_given_u(ClaytonPhi phi, double u, double v) {
    detail::check_open(u, v);
    return std::exp(log_conditional_given_u(phi, {std::log(u), std::log(v)}));
}

/// Inverse of conditional_given_u in v: the v with dC/du(u, v) = p, for
/// u in (0, 1] and p in (0, 1). Solving gives
/// v^-phi = u^-phi (p^(-phi/(1+phi)) - 1) + 1.
inline double conditional_quantile_given_u(ClaytonPhi phi, double u, double p) {
    if (!(u > 0.0 && u <= 1.0)) throw DomainError("conditional quantile: u must lie in (0, 1]");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("conditional quantile: p must lie in (0, 1)");
    const double f = phi.value();
    const double log_b = -f * std::log(u) + std::log(std::expm1(-(f / (1.0 + f)) * std::log(p)));
    const double softplus = log_b > 0.0 ? log_b + std::log1p(std::exp(-log_b)) : std::log1p(std::exp(log_b));
    return std::exp(-softplus / f);
}

inline double kendall_tau(ClaytonPhi phi) noexcept { return phi.value() / (phi.value() + 2.0); }

/// Spearman's rho = 12 * integral of C over the unit square - 3, by adaptive
/// tensor Gauss-Legendre. Throws QuadratureError if refinement runs out.
inline double spearman_rho(ClaytonPhi phi, double tolerance = 1e-6) {
    const auto copula = [phi](double u, double v) {
        return std::exp(-detail::log_clayton_sum(phi.value(), {std::log(u), std::log(v)}) / phi.value());
    };
    quadrature::Options opt;
    opt.tolerance = tolerance / 12.0;
    return 12.0 * quadrature::integrate_2d(copula, 0.0, 1.0, 0.0, 1.0, opt) - 3.0;
}

/// Kendall's tau-b over all pairs of pairs, O(n^2).
inline double sample_kendall_tau(std::span<const std::pair<double, double>> pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) throw DomainError("sample_kendall_tau: need at least 2 pairs");
    double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = pairs[i].first - pairs[j].first;
            const double dy = pairs[i].second - pairs[j].second;
            if (dx == 0.0) ties_x += 1.0;
            if (dy == 0.0) ties_y += 1.0;
            if (dx == 0.0 || dy == 0.0) continue;
            ((dx > 0.0) == (dy > 0.0) ? concordant : discordant) += 1.0;
        }
    }
    const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const double denom = std::sqrt((total - ties_x) * (total - ties_y));
    if (denom == 0.0) throw DomainError("sample_kendall_tau: all values tied in one coordinate");
    return (concordant - discordant) / denom;
}

}  // namespace defectiva
