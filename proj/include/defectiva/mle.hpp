#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "defectiva/bdgd.hpp"
#include "defectiva/clayton.hpp"
#include "defectiva/dgompertz.hpp"
#include "defectiva/nelder_mead.hpp"
#include "defectiva/nonparam.hpp"
#include "defectiva/normal.hpp"

namespace defectiva {

using Covariance = Eigen::Matrix<double, 5, 5>;

struct Interval {
    double lo;
    double hi;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Point estimate with standard error and a symmetric normal interval.
/// `truncated` is set when the interval was clipped to [0, 1].
struct Inference {
    double estimate = 0.0;
    double std_error = 0.0;
    Interval ci{0.0, 0.0};
    bool truncated = false;
};

struct FitConfig {
    std::optional<BdgdParams> initial;  ///< data-driven start when empty
    int max_iterations = 5000;
    double simplex_tolerance = 1e-8;
    double hessian_step = 1e-4;  ///< relative
    double confidence_level = 0.95;
    double initial_simplex_fraction = 0.1;
    bool log_space = true;       ///< optimize log-parameters; false searches the original space
    double log_bound = 15.0;     ///< leaving [-b, b] in log space flags a monotone likelihood
};

struct FitReport {
    BdgdParams estimates;
    std::optional<ParamVector> std_errors;
    std::optional<std::array<Interval, 5>> wald_intervals;
    std::optional<Covariance> covariance;
    std::optional<Inference> rho1;
    std::optional<Inference> rho2;
    std::optional<Inference> tau_k;
    DerivedQuantities derived{};  ///< point values; tau_s is NaN for monotone fits
    double loglik_at_max = 0.0;
    bool converged = false;
    bool monotone_likelihood = false;
    int iterations = 0;
};

// --- delta method ---------------------------------------------------------

namespace detail {
inline Inference normal_interval(double estimate, double se, double level, bool clip_unit) {
    const double z = two_sided_z(level);
    Inference out{estimate, se, {estimate - z * se, estimate + z * se}, false};
    if (clip_unit) {
        if (out.ci.lo < 0.0) { out.ci.lo = 0.0; out.truncated = true; }
        if (out.ci.hi > 1.0) { out.ci.hi = 1.0; out.truncated = true; }
    }
    return out;
}
}  // namespace detail

/// Cure-rate inference for both margins. For rho = exp(-alpha/beta) the
/// gradient in (alpha, beta) is rho * (-1/beta, alpha/beta^2); a negative
/// propagated variance leaves that margin empty.
inline std::array<std::optional<Inference>, 2> delta_method_cure(const BdgdParams& estimates, const Covariance& cov,
                                                                 double level = 0.95) {
    std::array<std::optional<Inference>, 2> out;
    for (int m = 0; m < 2; ++m) {
        const DGParams& g = m == 0 ? estimates.m1() : estimates.m2();
        const int ia = 2 * m, ib = 2 * m + 1;
        const double rho = cure_rate(g);
        const Eigen::Vector2d grad(-rho / g.beta(), rho * g.alpha() / (g.beta() * g.beta()));
        Eigen::Matrix2d block;
        block << cov(ia, ia), cov(ia, ib), cov(ib, ia), cov(ib, ib);
        const double var = grad.dot(block * grad);
        if (!(var >= 0.0)) continue;
        out[static_cast<std::size_t>(m)] = detail::normal_interval(rho, std::sqrt(var), level, true);
    }
    return out;
}

/// Kendall's tau = phi / (phi + 2), so dtau/dphi = 2 / (phi + 2)^2.
inline Inference delta_method_tau(double phi_hat, double var_phi, double level = 0.95) {
    if (!(var_phi >= 0.0)) throw DomainError("delta_method_tau: variance must be nonnegative");
    const double slope = 2.0 / ((phi_hat + 2.0) * (phi_hat + 2.0));
    return detail::normal_interval(phi_hat / (phi_hat + 2.0), std::abs(slope) * std::sqrt(var_phi), level, true);
}

// --- starting values ------------------------------------------------------

inline double univariate_loglik(const DGParams& p, const UnivariateSample& s) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.times.size(); ++i)
        total += s.events[i] == 1 ? log_density(p, s.times[i]) : log_survival(p, s.times[i]);
    return total;
}

/// Censored univariate DG fit for one margin, ignoring the other. Starts from
/// the Kaplan-Meier tail level and the mean event time; falls back to that
/// start when the margin has no events.
inline DGParams univariate_fit(const UnivariateSample& s) {
    double event_sum = 0.0;
    int events = 0;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (s.events[i] == 1) { event_sum += s.times[i]; ++events; }
    }
    const auto km = kaplan_meier(s);
    const double tail = km.values.empty() ? 1.0 : km.values.back();
    const double rho0 = std::clamp(tail, 0.02, 0.95);
    const double beta0 = events > 0 ? 1.0 / (event_sum / events) : 1.0;
    const DGParams start(-beta0 * std::log(rho0), beta0);
    if (events == 0) return start;

    const auto objective = [&](const std::array<double, 2>& x) {
        if (std::abs(x[0]) > 30.0 || std::abs(x[1]) > 30.0) return std::numeric_limits<double>::infinity();
        const double v = univariate_loglik(DGParams(std::exp(x[0]), std::exp(x[1])), s);
        return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
    };
    NelderMeadOptions opt;
    opt.max_iterations = 2000;
    const auto r = nelder_mead(objective, std::array<double, 2>{std::log(start.alpha()), std::log(start.beta())},
                               std::array<double, 2>{0.1, 0.1}, opt);
    if (!std::isfinite(r.value) || std::abs(r.x[0]) > 15.0 || std::abs(r.x[1]) > 15.0) return start;
    return DGParams(std::exp(r.x[0]), std::exp(r.x[1]));
}

/// Data-driven start: independent marginal fits plus phi = 2 tau / (1 - tau)
/// from the sample Kendall tau of the recorded time pairs.
inline BdgdParams default_initial(const Dataset& data) {
    const DGParams m1 = univariate_fit(margin(data, 1));
    const DGParams m2 = univariate_fit(margin(data, 2));
    double tau = 0.3;
    if (data.size() >= 2) {
        std::vector<std::pair<double, double>> pairs;
        pairs.reserve(data.size());
        for (const auto& o : data) pairs.emplace_back(o.t1, o.t2);
        try {
            tau = sample_kendall_tau(pairs);
        } catch (const DomainError&) {
        }
    }
    tau = std::clamp(tau, 0.05, 0.9);
    return BdgdParams(m1, m2, ClaytonPhi(2.0 * tau / (1.0 - tau)));
}

// --- fit ------------------------------------------------------------------

namespace detail {
inline double safe_loglik(const ParamVector& theta, const Dataset& data) {
    for (double v : theta)
        if (!(v > 0.0) || !std::isfinite(v)) return -std::numeric_limits<double>::infinity();
    try {
        return loglik(BdgdParams::from_vector(theta), data);
    } catch (const DomainError&) {
    } catch (const LikelihoodError&) {
    }
    return -std::numeric_limits<double>::infinity();
}
}  // namespace detail

/// Maximum-likelihood fit by Nelder-Mead, log-parameterized by default.
/// Standard errors come from a central-difference Hessian of the
/// log-likelihood in the original parameterization.
inline FitReport fit(const Dataset& data, const FitConfig& config = {}) {
    if (!(config.confidence_level > 0.0 && config.confidence_level < 1.0))
        throw ConfigError("confidence level must lie in (0, 1)");
    const BdgdParams init = config.initial ? *config.initial : default_initial(data);
    const ParamVector theta0 = init.to_vector();

    ParamVector start{}, steps{};
    for (std::size_t i = 0; i < 5; ++i) {
        start[i] = config.log_space ? std::log(theta0[i]) : theta0[i];
        steps[i] = config.log_space ? std::log1p(config.initial_simplex_fraction)
                                    : config.initial_simplex_fraction * theta0[i];
    }
    const auto to_theta = [&](const ParamVector& x) {
        ParamVector t = x;
        if (config.log_space)
            for (auto& v : t) v = std::exp(v);
        return t;
    };
    const auto objective = [&](const ParamVector& x) {
        const double ll = detail::safe_loglik(to_theta(x), data);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };
    const auto left_box = [&](const ParamVector& x, double) {
        if (!config.log_space) return false;
        return std::any_of(x.begin(), x.end(), [&](double v) { return std::abs(v) > config.log_bound; });
    };

    NelderMeadOptions opt;
    opt.max_iterations = config.max_iterations;
    opt.tolerance = config.simplex_tolerance;
    const auto nm = nelder_mead(objective, start, steps, opt, left_box);

    const ParamVector theta = to_theta(nm.x);
    FitReport report{BdgdParams::from_vector(theta)};
    report.iterations = nm.iterations;
    report.loglik_at_max = -nm.value;
    report.converged = nm.converged && !nm.stopped;
    report.monotone_likelihood = nm.stopped;
    report.derived = {cure_rate(report.estimates.m1()), cure_rate(report.estimates.m2()),
                      kendall_tau(report.estimates.phi()), std::numeric_limits<double>::quiet_NaN()};
    if (report.monotone_likelihood || !std::isfinite(nm.value)) {
        report.converged = false;
        return report;
    }

    const auto hess = numerical_hessian([&](const ParamVector& t) { return detail::safe_loglik(t, data); }, theta,
                                        config.hessian_step);
    Covariance neg_h;
    bool finite = true;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            neg_h(i, j) = -hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            finite = finite && std::isfinite(neg_h(i, j));
        }
    const Eigen::LLT<Covariance> llt(neg_h);
    if (!finite || llt.info() != Eigen::Success) {
        report.monotone_likelihood = true;
        report.converged = false;
        return report;
    }
    const Covariance cov = llt.solve(Covariance::Identity());

    ParamVector se{};
    std::array<Interval, 5> wald{};
    const double z = two_sided_z(config.confidence_level);
    for (std::size_t i = 0; i < 5; ++i) {
        const double var = cov(static_cast<int>(i), static_cast<int>(i));
        se[i] = std::sqrt(std::max(var, 0.0));
        wald[i] = {theta[i] - z * se[i], theta[i] + z * se[i]};
    }
    report.covariance = cov;
    report.std_errors = se;
    report.wald_intervals = wald;
    const auto cure = delta_method_cure(report.estimates, cov, config.confidence_level);
    report.rho1 = cure[0];
    report.rho2 = cure[1];
    report.tau_k = delta_method_tau(theta[4], cov(4, 4), config.confidence_level);
    report.derived.tau_s = spearman_rho(report.estimates.phi());
    return report;
}

}  // namespace defectiva
