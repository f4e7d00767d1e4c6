#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "defectiva/bayes.hpp"
#include "defectiva/simulate.hpp"

using namespace defectiva;
using Catch::Approx;

namespace {
McmcConfig short_chain(std::uint64_t seed = 11) {
    McmcConfig c;
    c.iterations = 6000;
    c.burn_in = 2000;
    c.thin = 10;
    c.seed = seed;
    return c;
}
}  // namespace

TEST_CASE("prior box and chain configuration validation", "[bayes]") {
    PriorBox box;
    CHECK_NOTHROW(box.validate());
    box.bounds[1] = {-1.0, 2.0};
    CHECK_THROWS_AS(box.validate(), ConfigError);
    box.bounds[1] = {2.0, 2.0};
    CHECK_THROWS_AS(box.validate(), ConfigError);

    McmcConfig c;
    CHECK_NOTHROW(c.validate());
    c.burn_in = c.iterations;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.thin = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.proposal_scales = ParamVector{0.1, 0.1, 0.0, 0.1, 0.1};
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("type-7 sample quantiles", "[bayes]") {
    const std::vector<double> xs{4, 1, 3, 2};
    CHECK(sample_quantile(xs, 0.5) == 2.5);
    CHECK(sample_quantile(xs, 0.25) == 1.75);
    CHECK(sample_quantile(xs, 0.0) == 1.0);
    CHECK(sample_quantile(xs, 1.0) == 4.0);
    CHECK_THROWS_AS(sample_quantile({}, 0.5), DomainError);
}

TEST_CASE("flat target in a box gives uniform draws", "[bayes][montecarlo]") {
    Rng rng(2718);
    const std::array<Interval, 1> box{{{0.0, 1.0}}};
    const auto run = random_walk_metropolis([](const std::array<double, 1>&) { return 0.0; }, std::array<double, 1>{0.5},
                                            0.0, std::array<double, 1>{0.3}, box, {10000 * 20 + 1000, 1000, 20, true}, rng);
    REQUIRE(run.draws.size() == 10000);
    std::array<double, 20> counts{};
    for (const auto& [it, x] : run.draws) {
        REQUIRE(x[0] > 0.0);
        REQUIRE(x[0] < 1.0);
        counts[static_cast<std::size_t>(x[0] * 20.0)] += 1.0;
    }
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - 500.0) * (c - 500.0) / 500.0;
    CHECK(chi2 < 36.19);  // chi-square, 19 df, upper 1% point
    CHECK(run.acceptance_rates[0] > 0.0);
    CHECK(run.acceptance_rates[0] < 1.0);
}

TEST_CASE("posterior summary invariants", "[bayes]") {
    const auto truth = scenario(1).params;
    const auto d = generate({truth, 200, 17});
    const PriorBox box;
    const auto s = run_mcmc(d, box, short_chain());
    CHECK(s.retained_draws == 400);
    CHECK(s.chain.size() == 400);
    for (const auto& q : s.params) {
        CHECK(q.cri.lo <= q.median);
        CHECK(q.median <= q.cri.hi);
    }
    for (double a : s.acceptance_rates) {
        CHECK(a > 0.0);
        CHECK(a < 1.0);
    }
    for (const auto& draw : s.chain) {
        CHECK(box.contains(draw.theta));
        const auto q = derived_quantities(BdgdParams::from_vector(draw.theta), 1e-4);
        CHECK(q.rho1 > 0.0);
        CHECK(q.rho1 < 1.0);
        CHECK(q.rho2 > 0.0);
        CHECK(q.rho2 < 1.0);
    }
    CHECK(s.rho1.cri.lo <= s.rho1.median);
    CHECK(s.tau_s.median > s.tau_k.median);

    const auto again = run_mcmc(d, box, short_chain());
    REQUIRE(again.chain.size() == s.chain.size());
    for (std::size_t i = 0; i < s.chain.size(); ++i) CHECK(again.chain[i].theta == s.chain[i].theta);
    const auto other = run_mcmc(d, box, short_chain(12));
    CHECK(other.chain.back().theta != s.chain.back().theta);
}

TEST_CASE("a narrow prior box dominates", "[bayes]") {
    const auto truth = scenario(1).params;
    const auto d = generate({truth, 200, 19});
    const double eps = 1e-3;
    PriorBox box;
    const auto tv = truth.to_vector();
    for (std::size_t i = 0; i < 5; ++i) box.bounds[i] = {tv[i] - eps / 2, tv[i] + eps / 2};
    auto cfg = short_chain();
    cfg.initial = truth;
    const auto s = run_mcmc(d, box, cfg);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(s.params[i].median == Approx(tv[i]).margin(eps / 2));
        CHECK(s.params[i].cri.hi - s.params[i].cri.lo <= eps);
    }
}

TEST_CASE("independent data under a small dependence box", "[bayes]") {
    const auto p = BdgdParams::from_vector({1.0, 0.8, 1.0, 0.8, 1e-3});
    const auto d = generate({p, 300, 23});
    PriorBox box;
    box.bounds[4] = {0.0, 0.1};
    const auto s = run_mcmc(d, box, short_chain());
    CHECK(s.tau_k.median < 0.05);
}

TEST_CASE("sampler failure modes", "[bayes]") {
    const auto d = generate({scenario(1).params, 100, 29});
    auto outside = short_chain();
    outside.initial = BdgdParams::from_vector({20.0, 0.8, 1.0, 0.8, 1.0});
    CHECK_THROWS_AS(run_mcmc(d, PriorBox{}, outside), ConfigError);

    auto frozen = short_chain();
    frozen.tune = false;
    frozen.proposal_scales = ParamVector{1e6, 1e6, 1e6, 1e6, 1e6};
    CHECK_THROWS_AS(run_mcmc(d, PriorBox{}, frozen), DiagnosticError);
}

TEST_CASE("independent chains pool", "[bayes]") {
    const auto d = generate({scenario(1).params, 200, 31});
    const auto pooled = run_chains(d, PriorBox{}, short_chain(), 2);
    CHECK(pooled.retained_draws == 800);
    CHECK_THROWS_AS(run_chains(d, PriorBox{}, short_chain(), 0), ConfigError);
}

TEST_CASE("effective sample size", "[bayes][diagnostics]") {
    Rng rng(99);
    std::vector<double> iid(1000);
    for (auto& v : iid) v = rng.normal();
    const auto a = chain_diagnostics(iid);
    CHECK(a.ess >= 800);
    CHECK(a.ess <= 1200);
    CHECK(std::abs(a.lag1_autocorrelation) < 0.1);

    std::vector<double> ar(10000);
    ar[0] = rng.normal() / std::sqrt(1.0 - 0.81);
    for (std::size_t t = 1; t < ar.size(); ++t) ar[t] = 0.9 * ar[t - 1] + rng.normal();
    const auto b = chain_diagnostics(ar);
    CHECK(b.ess == Approx(10000.0 * 0.1 / 1.9).epsilon(0.25));
    CHECK(b.lag1_autocorrelation == Approx(0.9).margin(0.03));

    const std::vector<double> flat(500, 1.5);
    CHECK_THROWS_AS(chain_diagnostics(flat), DiagnosticError);
    const std::vector<double> tiny(50, 0.0);
    CHECK_THROWS_AS(chain_diagnostics(tiny), DiagnosticError);
}
