#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "defectiva/clayton.hpp"
#include "defectiva/dgompertz.hpp"
#include "defectiva/error.hpp"

namespace defectiva {

/// Flat parameter vector in the fixed order (alpha1, beta1, alpha2, beta2, phi).
using ParamVector = std::array<double, 5>;

inline constexpr std::array<const char*, 5> kParamNames{"alpha1", "beta1", "alpha2", "beta2", "phi"};

/// Bivariate defective Gompertz parameters: two DG marginals joined by a
/// Clayton survival copula.
class BdgdParams {
public:
    BdgdParams(DGParams m1, DGParams m2, ClaytonPhi phi) : m1_(m1), m2_(m2), phi_(phi) {}

    static BdgdParams from_vector(const ParamVector& v) {
        return BdgdParams(DGParams(v[0], v[1]), DGParams(v[2], v[3]), ClaytonPhi(v[4]));
    }

    ParamVector to_vector() const noexcept {
        return {m1_.alpha(), m1_.beta(), m2_.alpha(), m2_.beta(), phi_.value()};
    }

    const DGParams& m1() const noexcept { return m1_; }
    const DGParams& m2() const noexcept { return m2_; }
    ClaytonPhi phi() const noexcept { return phi_; }

    friend bool operator==(const BdgdParams&, const BdgdParams&) = default;

private:
    DGParams m1_;
    DGParams m2_;
    ClaytonPhi phi_;
};

/// One subject: two possibly right-censored times; delta = 1 means observed.
struct BivObs {
    double t1;
    int delta1;
    double t2;
    int delta2;

    friend bool operator==(const BivObs&, const BivObs&) = default;
};

enum class CensorClass { both_observed, first_only, second_only, both_censored };

inline CensorClass classify(const BivObs& o) noexcept {
    if (o.delta1 == 1) return o.delta2 == 1 ? CensorClass::both_observed : CensorClass::first_only;
    return o.delta2 == 1 ? CensorClass::second_only : CensorClass::both_censored;
}

/// Throws DataError (with `row`) for negative/non-finite times, non-binary
/// indicators, or an observed event at time zero.
inline void validate(const BivObs& o, std::size_t row) {
    const auto check_time = [row](double t, int delta, const char* name) {
        if (!std::isfinite(t) || t < 0.0) throw DataError(std::string(name) + " must be finite and nonnegative", row);
        if (delta != 0 && delta != 1) throw DataError(std::string("indicator for ") + name + " must be 0 or 1", row);
        if (delta == 1 && t == 0.0) throw DataError(std::string("observed event at ") + name + " = 0", row);
    };
    check_time(o.t1, o.delta1, "t1");
    check_time(o.t2, o.delta2, "t2");
}

class Dataset {
public:
    explicit Dataset(std::vector<BivObs> observations, std::vector<std::string> labels = {})
        : obs_(std::move(observations)), labels_(std::move(labels)) {
        if (obs_.empty()) throw DataError("dataset is empty");
        if (!labels_.empty() && labels_.size() != obs_.size()) throw DataError("label count does not match rows");
        for (std::size_t i = 0; i < obs_.size(); ++i) validate(obs_[i], i);
    }

    const std::vector<BivObs>& observations() const noexcept { return obs_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return obs_.size(); }
    const BivObs& operator[](std::size_t i) const { return obs_[i]; }
    auto begin() const noexcept { return obs_.begin(); }
    auto end() const noexcept { return obs_.end(); }

private:
    std::vector<BivObs> obs_;
    std::vector<std::string> labels_;
};

inline double log_joint_survival(const BdgdParams& p, double t1, double t2) {
    return log_joint_survival(p.phi(), {log_survival(p.m1(), t1), log_survival(p.m2(), t2)});
}

inline double joint_survival(const BdgdParams& p, double t1, double t2) {
    return std::exp(log_joint_survival(p, t1, t2));
}

namespace detail {
inline void check_positive_times(double t1, double t2) {
    if (!(t1 > 0.0 && t2 > 0.0)) throw DomainError("density requires strictly positive times");
}

inline double finite_or_throw(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite intermediate");
    return x;
}
}  // namespace detail

/// log f(t1,t2) = log f1 + log f2 + log c(S1, S2).
inline double log_density(const BdgdParams& p, double t1, double t2) {
    detail::check_positive_times(t1, t2);
    const LogMargins m{log_survival(p.m1(), t1), log_survival(p.m2(), t2)};
    return detail::finite_or_throw(
        log_density(p.m1(), t1) + log_density(p.m2(), t2) + log_copula_density_factor(p.phi(), m), "log_density");
}

/// log(-dS/dt1) = log f1(t1) + log dC/du (S1, S2).
inline double log_partial_t1(const BdgdParams& p, double t1, double t2) {
    if (!(t1 > 0.0 && t2 >= 0.0)) throw DomainError("log_partial_t1 requires t1 > 0, t2 >= 0");
    const LogMargins m{log_survival(p.m1(), t1), log_survival(p.m2(), t2)};
    return detail::finite_or_throw(log_density(p.m1(), t1) + log_conditional_given_u(p.phi(), m), "log_partial_t1");
}

/// log(-dS/dt2); the copula is exchangeable, so the roles of u and v swap.
inline double log_partial_t2(const BdgdParams& p, double t1, double t2) {
    if (!(t1 >= 0.0 && t2 > 0.0)) throw DomainError("log_partial_t2 requires t1 >= 0, t2 > 0");
    const LogMargins m{log_survival(p.m2(), t2), log_survival(p.m1(), t1)};
    return detail::finite_or_throw(log_density(p.m2(), t2) + log_conditional_given_u(p.phi(), m), "log_partial_t2");
}

/// Contribution of one observation to the log-likelihood. Marginal log terms
/// are computed once and shared by whichever class term applies; each class
/// term has the same floating-point composition as its standalone function.
inline double log_contribution(const BdgdParams& p, const BivObs& o) {
    const double ls1 = log_survival(p.m1(), o.t1);
    const double ls2 = log_survival(p.m2(), o.t2);
    const ClaytonPhi phi = p.phi();
    switch (classify(o)) {
        case CensorClass::both_observed:
            return (log_hazard(p.m1(), o.t1) + ls1) + (log_hazard(p.m2(), o.t2) + ls2) +
                   log_copula_density_factor(phi, {ls1, ls2});
        case CensorClass::first_only:
            return (log_hazard(p.m1(), o.t1) + ls1) + log_conditional_given_u(phi, {ls1, ls2});
        case CensorClass::second_only:
            return (log_hazard(p.m2(), o.t2) + ls2) + log_conditional_given_u(phi, {ls2, ls1});
        case CensorClass::both_censored:
            return log_joint_survival(phi, {ls1, ls2});
    }
    return 0.0;
}

/// Censored-data log-likelihood summed in row order. A non-finite term aborts
/// with the offending row index.
inline double loglik(const BdgdParams& p, const Dataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double term = log_contribution(p, data[i]);
        if (!std::isfinite(term)) throw LikelihoodError("non-finite log-likelihood contribution", i);
        total += term;
    }
    return total;
}

struct DerivedQuantities {
    double rho1;
    double rho2;
    double tau_k;
    double tau_s;
};

inline DerivedQuantities derived_quantities(const BdgdParams& p, double spearman_tolerance = 1e-6) {
    return {cure_rate(p.m1()), cure_rate(p.m2()), kendall_tau(p.phi()), spearman_rho(p.phi(), spearman_tolerance)};
}

/// Plateau of the joint survival surface, C(rho1, rho2): the probability that
/// neither event ever occurs.
inline double joint_cure_fraction(const BdgdParams& p) {
    return std::exp(log_joint_survival(p.phi(), {log_cure_rate(p.m1()), log_cure_rate(p.m2())}));
}

}  // namespace defectiva
