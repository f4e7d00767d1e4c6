#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "defectiva/mle.hpp"
#include "defectiva/simulate.hpp"
#include "oracles.hpp"

using namespace defectiva;
using Catch::Approx;

namespace {
FitConfig from_truth(const BdgdParams& p) {
    FitConfig c;
    c.initial = p;
    return c;
}

Dataset model_data(const BdgdParams& p, std::size_t n, std::uint64_t seed) {
    std::vector<BivObs> rows;
    for (const auto& r : oracle::model_sample(p.to_vector(), n, seed)) rows.push_back({r.t1, r.delta1, r.t2, r.delta2});
    return Dataset(std::move(rows));
}
}  // namespace

TEST_CASE("Nelder-Mead minimizes standard test functions", "[mle][optimizer]") {
    const auto rosen = [](const std::array<double, 2>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    NelderMeadOptions opt;
    opt.tolerance = 1e-14;
    const auto r = nelder_mead(rosen, std::array<double, 2>{-1.2, 1.0}, std::array<double, 2>{0.1, 0.1}, opt);
    CHECK(r.converged);
    CHECK(r.x[0] == Approx(1.0).margin(1e-4));
    CHECK(r.x[1] == Approx(1.0).margin(1e-4));

    const auto bowl = [](const std::array<double, 3>& x) {
        return std::pow(x[0] - 1.0, 2) + 2.0 * std::pow(x[1] + 2.0, 2) + 0.5 * std::pow(x[2] - 3.0, 2);
    };
    const auto q = nelder_mead(bowl, std::array<double, 3>{0, 0, 0}, std::array<double, 3>{0.5, 0.5, 0.5}, opt);
    CHECK(q.x[0] == Approx(1.0).margin(1e-5));
    CHECK(q.x[1] == Approx(-2.0).margin(1e-5));
    CHECK(q.x[2] == Approx(3.0).margin(1e-5));

    const auto stopped = nelder_mead(bowl, std::array<double, 3>{0, 0, 0}, std::array<double, 3>{0.5, 0.5, 0.5}, opt,
                                     [](const std::array<double, 3>& x, double) { return x[1] < -1.0; });
    CHECK(stopped.stopped);
    CHECK_FALSE(stopped.converged);
}

TEST_CASE("numerical Hessian of a quadratic", "[mle][optimizer]") {
    const auto f = [](const std::array<double, 2>& x) { return 3.0 * x[0] * x[0] + 2.0 * x[0] * x[1] - x[1] * x[1]; };
    const auto h = numerical_hessian(f, std::array<double, 2>{0.7, -1.3}, 1e-4);
    CHECK(h[0][0] == Approx(6.0).margin(1e-5));
    CHECK(h[0][1] == Approx(2.0).margin(1e-5));
    CHECK(h[1][0] == Approx(2.0).margin(1e-5));
    CHECK(h[1][1] == Approx(-2.0).margin(1e-5));
}

TEST_CASE("delta method for cure rates", "[mle][delta]") {
    const auto est = BdgdParams::from_vector({1.0, 0.8, 0.5, 1.5, 2.0});
    const auto zero = delta_method_cure(est, Covariance::Zero());
    REQUIRE(zero[0]);
    CHECK(zero[0]->std_error == 0.0);
    CHECK(zero[0]->ci.lo == zero[0]->estimate);
    CHECK(zero[0]->ci.hi == zero[0]->estimate);

    Covariance cov = Covariance::Zero();
    cov(0, 0) = 0.01;
    cov(1, 1) = 0.01;
    const auto r = delta_method_cure(est, cov);
    const double rho = std::exp(-1.25);
    const double hand = rho * std::sqrt(std::pow(1.0 / 0.8, 2) * 0.01 + std::pow(1.0 / 0.64, 2) * 0.01);
    REQUIRE(r[0]);
    CHECK(r[0]->estimate == Approx(rho).epsilon(1e-15));
    CHECK(r[0]->std_error == Approx(hand).epsilon(1e-12));
    CHECK(r[0]->ci.lo == Approx(rho - 1.959963984540054 * hand).epsilon(1e-9));
    REQUIRE(r[1]);
    CHECK(r[1]->std_error == 0.0);

    // a wide interval is clipped to [0, 1] and flagged
    cov(0, 0) = 4.0;
    const auto wide = delta_method_cure(est, cov);
    CHECK(wide[0]->ci.lo == 0.0);
    CHECK(wide[0]->truncated);

    cov(0, 0) = -4.0;
    CHECK_FALSE(delta_method_cure(est, cov)[0].has_value());

    // 0.6674 +- 1.96 * 0.1096
    const double z = two_sided_z(0.95);
    CHECK(0.6674 - z * 0.1096 == Approx(0.4525).margin(1e-3));
    CHECK(0.6674 + z * 0.1096 == Approx(0.8823).margin(1e-3));
}

TEST_CASE("delta method for Kendall's tau", "[mle][delta]") {
    const auto one = delta_method_tau(1.0, 0.09);
    CHECK(one.estimate == Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(one.std_error == Approx(2.0 / 9.0 * 0.3).epsilon(1e-14));
    CHECK(std::round(one.std_error * 1e4) / 1e4 == 0.0667);
    CHECK(delta_method_tau(1.0, 0.0).std_error == 0.0);
    CHECK_THROWS_AS(delta_method_tau(1.0, -1.0), DomainError);

    // phi 8.2022 with se 2.0747
    const auto breast = delta_method_tau(8.2022, 2.0747 * 2.0747);
    CHECK(breast.estimate == Approx(0.8039).margin(1e-4));
    CHECK(breast.std_error == Approx(0.0399).margin(1e-4));
}

TEST_CASE("fit recovers scenario 1 from the truth", "[mle][montecarlo]") {
    const auto truth = scenario(1).params;
    const auto d = model_data(truth, 1000, 8080);
    const auto r = fit(d, from_truth(truth));
    REQUIRE(r.converged);
    REQUIRE_FALSE(r.monotone_likelihood);
    REQUIRE(r.std_errors);
    const auto est = r.estimates.to_vector(), tv = truth.to_vector();
    for (std::size_t i = 0; i < 5; ++i) {
        INFO(kParamNames[i]);
        CHECK((*r.std_errors)[i] >= 0.0);
        CHECK(r.wald_intervals->at(i).contains(est[i]));
        CHECK(std::abs(est[i] - tv[i]) < 3.0 * (*r.std_errors)[i]);
    }
    CHECK(r.rho1->ci.contains(r.rho1->estimate));
    CHECK(r.tau_k->ci.contains(r.tau_k->estimate));
    CHECK(r.loglik_at_max == Approx(loglik(r.estimates, d)).epsilon(1e-12));
}

TEST_CASE("fit on generated scenario 1 data", "[mle][montecarlo]") {
    const auto truth = scenario(1).params;
    const auto r = fit(generate({truth, 1000, 8080}), from_truth(truth));
    REQUIRE(r.converged);
    REQUIRE(r.rho1);
    CHECK(std::abs(r.rho1->estimate - cure_rate(truth.m1())) < 3.0 * r.rho1->std_error);
}

TEST_CASE("fit flags all-censored data as monotone", "[mle]") {
    std::vector<BivObs> rows;
    for (int i = 1; i <= 50; ++i) rows.push_back({0.1 * i, 0, 0.05 * i, 0});
    const auto r = fit(Dataset(rows));
    CHECK(r.monotone_likelihood);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.std_errors.has_value());
}

TEST_CASE("fit on near-independent data", "[mle][montecarlo]") {
    const auto p = BdgdParams::from_vector({1.0, 0.8, 1.0, 0.8, 1e-3});
    const auto d = generate({p, 1000, 4242});
    const auto r = fit(d);
    CHECK(r.derived.tau_k < 0.1);
}

TEST_CASE("fit properties at the optimum", "[mle][property]") {
    const auto truth = scenario(1).params;
    const auto d = model_data(truth, 500, 555);
    const auto a = fit(d, from_truth(truth));
    const auto b = fit(d, from_truth(truth));
    REQUIRE(a.converged);
    CHECK(a.estimates.to_vector() == b.estimates.to_vector());
    CHECK(a.loglik_at_max == b.loglik_at_max);
    CHECK(a.std_errors == b.std_errors);

    const auto best = a.estimates.to_vector();
    for (std::size_t i = 0; i < 5; ++i)
        for (double f : {0.99, 1.01}) {
            auto v = best;
            v[i] *= f;
            CHECK(loglik(BdgdParams::from_vector(v), d) <= a.loglik_at_max);
        }

    const auto h = numerical_hessian([&](const ParamVector& t) { return loglik(BdgdParams::from_vector(t), d); }, best, 1e-4);
    double asym = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            asym = std::max(asym, std::abs(h[i][j] - h[j][i]));
            scale = std::max(scale, std::abs(h[i][j]));
        }
    CHECK(asym / scale < 1e-3);

    FitConfig plain = from_truth(truth);
    plain.log_space = false;
    const auto c = fit(d, plain);
    REQUIRE(c.converged);
    const auto other = c.estimates.to_vector();
    for (std::size_t i = 0; i < 5; ++i) CHECK(oracle::rel_err(other[i], best[i]) < 1e-4);
}

TEST_CASE("interval width shrinks like one over root n", "[mle][montecarlo]") {
    const auto truth = scenario(1).params;
    const auto mean_widths = [&](std::size_t n) {
        std::array<double, 5> w{};
        int used = 0;
        for (std::uint64_t r = 0; r < 10; ++r) {
            const auto f = fit(model_data(truth, n, 900 + r), from_truth(truth));
            if (!f.wald_intervals) continue;
            for (std::size_t i = 0; i < 5; ++i) w[i] += (*f.wald_intervals)[i].hi - (*f.wald_intervals)[i].lo;
            ++used;
        }
        for (auto& v : w) v /= used;
        return w;
    };
    const auto small = mean_widths(100), large = mean_widths(400);
    for (std::size_t i = 0; i < 5; ++i) {
        INFO(kParamNames[i]);
        CHECK(large[i] / small[i] == Approx(0.5).epsilon(0.3));
    }
}

TEST_CASE("fit configuration and starting values", "[mle]") {
    const auto d = generate({scenario(5).params, 300, 3});
    FitConfig bad;
    bad.confidence_level = 1.0;
    CHECK_THROWS_AS(fit(d, bad), ConfigError);

    const auto init = default_initial(d);
    std::vector<std::pair<double, double>> pairs;
    for (const auto& o : d) pairs.emplace_back(o.t1, o.t2);
    const double tau = std::clamp(sample_kendall_tau(pairs), 0.05, 0.9);
    CHECK(init.phi().value() == Approx(2.0 * tau / (1.0 - tau)).epsilon(1e-12));

    const auto m1 = univariate_fit(margin(d, 1));
    CHECK(univariate_loglik(m1, margin(d, 1)) >= univariate_loglik(init.m1(), margin(d, 1)) - 1e-9);
    CHECK(univariate_loglik(m1, margin(d, 1)) >= univariate_loglik(scenario(5).params.m1(), margin(d, 1)));
}
