#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "defectiva/bdgd.hpp"
#include "defectiva/error.hpp"
#include "defectiva/mle.hpp"
#include "defectiva/normal.hpp"
#include "defectiva/parallel.hpp"
#include "defectiva/random.hpp"
#include "defectiva/simulate.hpp"

namespace defectiva {

/// Quantities summarized per cell, in output order.
inline constexpr std::array<const char*, 8> kTrackedNames{"alpha1", "beta1", "alpha2", "beta2",
                                                          "phi",    "rho1",  "rho2",   "tau_k"};
inline constexpr std::size_t kTracked = kTrackedNames.size();

inline std::size_t tracked_index(const std::string& name) {
    for (std::size_t i = 0; i < kTracked; ++i)
        if (name == kTrackedNames[i]) return i;
    throw ConfigError("unknown tracked quantity: " + name);
}

inline std::array<double, kTracked> tracked_values(const BdgdParams& p) {
    const auto v = p.to_vector();
    return {v[0], v[1], v[2], v[3], v[4], cure_rate(p.m1()), cure_rate(p.m2()), kendall_tau(p.phi())};
}

/// Normal-approximation acceptance band for an observed coverage proportion
/// over N replicates at 5% significance: p +/- z_0.975 sqrt(p (1-p) / N).
inline Interval coverage_band(std::size_t replicates, double nominal) {
    if (replicates < 2) throw ConfigError("coverage_band: need at least 2 replicates");
    if (!(nominal > 0.0 && nominal < 1.0)) throw ConfigError("coverage_band: nominal must lie in (0, 1)");
    const double half = two_sided_z(0.95) * std::sqrt(nominal * (1.0 - nominal) / static_cast<double>(replicates));
    return {nominal - half, nominal + half};
}

/// Standard grid of sample sizes: 50, 75, ..., 500.
inline std::vector<std::size_t> sample_size_grid() {
    std::vector<std::size_t> out;
    for (std::size_t n = 50; n <= 500; n += 25) out.push_back(n);
    return out;
}

struct StudyConfig {
    std::vector<int> scenarios{1};
    std::vector<std::size_t> sample_sizes{100, 200};
    std::size_t replicates = 200;
    std::uint64_t seed = 20240101;
    double nominal_coverage = 0.95;
    FitConfig fit;
    unsigned threads = 0;  ///< 0: thread_count()

    void validate() const {
        if (scenarios.empty()) throw ConfigError("study needs at least one scenario");
        for (int s : scenarios)
            if (s < 1 || s > 12) throw ConfigError("scenario id must be in 1..12");
        if (sample_sizes.empty()) throw ConfigError("study needs at least one sample size");
        for (auto n : sample_sizes)
            if (n < 2) throw ConfigError("sample sizes must be at least 2");
        if (replicates < 2) throw ConfigError("replicates must be at least 2");
        if (!(nominal_coverage > 0.0 && nominal_coverage < 1.0)) throw ConfigError("nominal coverage must lie in (0, 1)");
    }
};

enum class ReplicateStatus { usable, monotone, failed };

/// Outcome of one generate-and-fit replicate.
struct ReplicateOutcome {
    ReplicateStatus status = ReplicateStatus::failed;
    std::array<double, kTracked> estimates{};
    std::array<bool, kTracked> covered{};
    double tau_s = std::numeric_limits<double>::quiet_NaN();
    double sample_tau = std::numeric_limits<double>::quiet_NaN();
};

struct ParameterSummary {
    std::string name;
    double nominal = 0.0;
    double bias = 0.0;
    double mse = 0.0;
    double coverage = 0.0;
    std::vector<double> estimates;  ///< usable replicates, in replicate order
};

struct CellResult {
    int scenario = 0;
    std::size_t n = 0;
    std::size_t usable = 0;
    std::size_t monotone = 0;
    std::size_t failed = 0;
    bool populated = false;  ///< false when no replicate was usable
    std::vector<ParameterSummary> parameters;
    double mean_tau_k_hat = std::numeric_limits<double>::quiet_NaN();
    double mean_tau_s_hat = std::numeric_limits<double>::quiet_NaN();
    double mean_sample_tau = std::numeric_limits<double>::quiet_NaN();

    const ParameterSummary& parameter(const std::string& name) const { return parameters.at(tracked_index(name)); }
};

struct StudyResult {
    StudyConfig config;
    Interval band{0.0, 0.0};
    std::vector<CellResult> cells;  ///< (scenario, n) in config order

    const CellResult& cell(int scenario, std::size_t n) const {
        for (const auto& c : cells)
            if (c.scenario == scenario && c.n == n) return c;
        throw ConfigError("no such study cell");
    }
};

/// Fit a replicate and score it against the nominal values. Fit exceptions
/// and non-converged fits count as failures; monotone likelihoods are kept
/// apart from both.
inline ReplicateOutcome score_replicate(const FitReport& r, const BdgdParams& truth) {
    ReplicateOutcome out;
    if (r.monotone_likelihood) {
        out.status = ReplicateStatus::monotone;
        return out;
    }
    if (!r.converged || !r.wald_intervals) return out;
    out.status = ReplicateStatus::usable;
    out.estimates = tracked_values(r.estimates);
    const auto nominal = tracked_values(truth);
    for (std::size_t i = 0; i < 5; ++i) out.covered[i] = (*r.wald_intervals)[i].contains(nominal[i]);
    out.covered[5] = r.rho1 && r.rho1->ci.contains(nominal[5]);
    out.covered[6] = r.rho2 && r.rho2->ci.contains(nominal[6]);
    out.covered[7] = r.tau_k && r.tau_k->ci.contains(nominal[7]);
    out.tau_s = r.derived.tau_s;
    return out;
}

/// Aggregate the replicates of one cell: bias and MSE against the nominal
/// value, coverage as the fraction of usable replicates whose interval holds it.
inline CellResult summarize_cell(int scenario_id, std::size_t n, const BdgdParams& truth,
                                 const std::vector<ReplicateOutcome>& reps) {
    CellResult cell;
    cell.scenario = scenario_id;
    cell.n = n;
    const auto nominal = tracked_values(truth);
    cell.parameters.resize(kTracked);
    for (std::size_t k = 0; k < kTracked; ++k) {
        cell.parameters[k].name = kTrackedNames[k];
        cell.parameters[k].nominal = nominal[k];
    }
    double tau_k_sum = 0.0, tau_s_sum = 0.0, sample_tau_sum = 0.0;
    std::size_t tau_s_count = 0, sample_tau_count = 0;
    std::array<std::size_t, kTracked> hits{};
    for (const auto& r : reps) {
        if (std::isfinite(r.sample_tau)) { sample_tau_sum += r.sample_tau; ++sample_tau_count; }
        if (r.status == ReplicateStatus::monotone) { ++cell.monotone; continue; }
        if (r.status == ReplicateStatus::failed) { ++cell.failed; continue; }
        ++cell.usable;
        for (std::size_t k = 0; k < kTracked; ++k) {
            cell.parameters[k].estimates.push_back(r.estimates[k]);
            if (r.covered[k]) ++hits[k];
        }
        tau_k_sum += r.estimates[7];
        if (std::isfinite(r.tau_s)) { tau_s_sum += r.tau_s; ++tau_s_count; }
    }
    if (sample_tau_count > 0) cell.mean_sample_tau = sample_tau_sum / static_cast<double>(sample_tau_count);
    if (cell.usable == 0) return cell;

    cell.populated = true;
    const double m = static_cast<double>(cell.usable);
    for (std::size_t k = 0; k < kTracked; ++k) {
        auto& s = cell.parameters[k];
        double dev = 0.0, sq = 0.0;
        for (double e : s.estimates) {
            dev += e - s.nominal;
            sq += (e - s.nominal) * (e - s.nominal);
        }
        s.bias = dev / m;
        s.mse = sq / m;
        s.coverage = static_cast<double>(hits[k]) / m;
    }
    cell.mean_tau_k_hat = tau_k_sum / m;
    if (tau_s_count > 0) cell.mean_tau_s_hat = tau_s_sum / static_cast<double>(tau_s_count);
    return cell;
}

/// Fitter signature: (dataset, fit config with the nominal start) -> FitReport.
using Fitter = std::function<FitReport(const Dataset&, const FitConfig&)>;

/// Monte-Carlo study: for every (scenario, n) cell, `replicates` datasets are
/// generated from per-replicate streams (seed, scenario, n, replicate), fitted
/// from the nominal parameters, and folded in replicate order.
inline StudyResult run_study(const StudyConfig& config, const Fitter& fitter = [](const Dataset& d, const FitConfig& c) {
    return fit(d, c);
}) {
    config.validate();
    StudyResult result;
    result.config = config;
    result.band = coverage_band(config.replicates, config.nominal_coverage);

    struct Job { int scenario; std::size_t n; std::size_t replicate; };
    std::vector<Job> jobs;
    for (int s : config.scenarios)
        for (auto n : config.sample_sizes)
            for (std::size_t r = 0; r < config.replicates; ++r) jobs.push_back({s, n, r});

    std::vector<ReplicateOutcome> outcomes(jobs.size());
    parallel_for(
        jobs.size(),
        [&](std::size_t j) {
            const Job& job = jobs[j];
            const BdgdParams truth = scenario(job.scenario).params;
            GenConfig gen{truth, job.n,
                          derive_seed({config.seed, static_cast<std::uint64_t>(job.scenario), job.n, job.replicate})};
            ReplicateOutcome out;
            try {
                const Dataset data = generate(gen);
                std::vector<std::pair<double, double>> pairs;
                pairs.reserve(data.size());
                for (const auto& o : data) pairs.emplace_back(o.t1, o.t2);
                const double sample_tau = sample_kendall_tau(pairs);
                FitConfig fc = config.fit;
                fc.initial = truth;
                out = score_replicate(fitter(data, fc), truth);
                out.sample_tau = sample_tau;
            } catch (const std::exception&) {
                out.status = ReplicateStatus::failed;
            }
            outcomes[j] = out;
        },
        config.threads == 0 ? thread_count() : config.threads);

    std::size_t j = 0;
    for (int s : config.scenarios) {
        const BdgdParams truth = scenario(s).params;
        for (auto n : config.sample_sizes) {
            std::vector<ReplicateOutcome> cell(outcomes.begin() + static_cast<std::ptrdiff_t>(j),
                                               outcomes.begin() + static_cast<std::ptrdiff_t>(j + config.replicates));
            j += config.replicates;
            result.cells.push_back(summarize_cell(s, n, truth, cell));
        }
    }
    return result;
}

struct BoxplotRow {
    std::size_t n;
    double estimate;
    double nominal;
};

/// Long-format (n, estimate, nominal) rows for one quantity and scenario.
inline std::vector<BoxplotRow> export_boxplot_series(const StudyResult& result, const std::string& parameter,
                                                     int scenario_id) {
    const std::size_t k = tracked_index(parameter);
    std::vector<BoxplotRow> rows;
    for (const auto& c : result.cells) {
        if (c.scenario != scenario_id) continue;
        for (double e : c.parameters.at(k).estimates) rows.push_back({c.n, e, c.parameters[k].nominal});
    }
    if (rows.empty()) throw DataError("no estimates for " + parameter + " in scenario " + std::to_string(scenario_id));
    return rows;
}

}  // namespace defectiva
