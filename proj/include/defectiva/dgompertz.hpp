#pragma once

#include <cmath>

#include "defectiva/error.hpp"

/// Defective Gompertz marginal: hazard h(t) = alpha * exp(-beta t) with both
/// parameters positive, so the survival curve plateaus at exp(-alpha/beta).
namespace defectiva {

class DGParams {
public:
    DGParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        if (!(alpha > 0.0 && std::isfinite(alpha))) throw DomainError("DGParams: alpha must be positive and finite");
        if (!(beta > 0.0 && std::isfinite(beta))) throw DomainError("DGParams: beta must be positive and finite");
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    friend bool operator==(const DGParams&, const DGParams&) = default;

private:
    double alpha_;
    double beta_;
};

namespace detail {
inline void check_time(double t) {
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
}
}  // namespace detail

/// log S(t) = (alpha/beta) * expm1(-beta t); finite for every t >= 0 including +inf.
inline double log_survival(const DGParams& p, double t) {
    detail::check_time(t);
    return (p.alpha() / p.beta()) * std::expm1(-p.beta() * t);
}

inline double survival(const DGParams& p, double t) { return std::exp(log_survival(p, t)); }

/// F(t) = 1 - S(t), bounded above by 1 - cure_rate.
inline double cdf(const DGParams& p, double t) { return -std::expm1(log_survival(p, t)); }

inline double log_hazard(const DGParams& p, double t) {
    detail::check_time(t);
    return std::log(p.alpha()) - p.beta() * t;
}

inline double hazard(const DGParams& p, double t) {
    detail::check_time(t);
    return p.alpha() * std::exp(-p.beta() * t);
}

inline double log_density(const DGParams& p, double t) { return log_hazard(p, t) + log_survival(p, t); }

inline double density(const DGParams& p, double t) { return hazard(p, t) * survival(p, t); }

inline double log_cure_rate(const DGParams& p) noexcept { return -p.alpha() / p.beta(); }

inline double cure_rate(const DGParams& p) noexcept { return std::exp(log_cure_rate(p)); }

/// Mass of the non-cured part, 1 - rho, without cancellation for small alpha/beta.
inline double susceptible_fraction(const DGParams& p) noexcept { return -std::expm1(log_cure_rate(p)); }

/// Inverse of the defective CDF on (0, 1 - rho). Levels within 1e-12 of the
/// upper boundary are rejected: the time there is unbounded.
inline double inverse_cdf(const DGParams& p, double u) {
    constexpr double boundary_margin = 1e-12;
    if (!(u > 0.0)) throw DomainError("inverse_cdf: level must be positive");
    if (!(u < susceptible_fraction(p) - boundary_margin))
        throw DomainError("inverse_cdf: level at or beyond the defective mass 1 - rho");
    const double inner = (p.beta() / p.alpha()) * std::log1p(-u);
    return -std::log1p(inner) / p.beta();
}

}  // namespace defectiva
