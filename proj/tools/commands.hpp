#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "defectiva/defectiva.hpp"
#include "json.hpp"

namespace defectiva::cli {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kFailure = 1, kSchemaError = 2, kNotConverged = 3, kConfigError = 4 };

struct FitOptions {
    fs::path input;
    fs::path out_dir = ".";
    std::vector<double> init;  ///< empty or five values
    double level = 0.95;
};

struct BayesOptions {
    fs::path input;
    fs::path out_dir = ".";
    std::vector<double> prior_box;  ///< empty or ten values, (lo, hi) per parameter
    std::vector<double> init;
    std::size_t iterations = 60000;
    std::size_t burn_in = 10000;
    std::size_t thin = 25;
    std::size_t chains = 1;
    std::uint64_t seed = 1;
};

struct SimulateOptions {
    fs::path out_dir = ".";
    std::string output = "dataset.csv";
    std::optional<int> scenario;
    std::vector<double> params;  ///< explicit parameters when no scenario is given
    std::optional<double> phi;   ///< replaces the dependence parameter
    std::size_t n = 100;
    std::uint64_t seed = 1;
};

struct StudyOptions {
    fs::path out_dir = ".";
    std::vector<int> scenarios{1};
    std::vector<std::size_t> sizes{100, 200};
    std::size_t replicates = 200;
    std::uint64_t seed = 20240101;
    double level = 0.95;
    unsigned threads = 0;
    std::vector<std::string> boxplot;  ///< tracked quantities to export per replicate
};

/// 64-bit FNV-1a digest of a byte string, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

namespace detail {

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Collects written files and the manifest for one command invocation.
class Run {
public:
    Run(std::string command, fs::path out_dir, std::ostream& err)
        : command_(std::move(command)), out_dir_(std::move(out_dir)), err_(err),
          start_(std::chrono::steady_clock::now()) {}

    Json config = Json::object();
    std::optional<std::uint64_t> seed;

    void record_input(const fs::path& p, const std::string& bytes) { inputs_[p.string()] = fnv1a_hex(bytes); }

    template <class Writer>
    void write(const std::string& name, Writer&& writer) {
        fs::create_directories(out_dir_);
        std::ofstream out(out_dir_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (out_dir_ / name).string());
        writer(out);
        if (!out) throw std::runtime_error("write failed for " + (out_dir_ / name).string());
        outputs_.push_back(name);
    }

    void write_json(const std::string& name, const Json& j) {
        write(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    }

    /// Runs `body`, maps exceptions to exit codes and always leaves a manifest.
    template <class Body>
    int execute(Body&& body) {
        int code = kOk;
        std::string message;
        try {
            code = body();
        } catch (const DataError& e) {
            code = kSchemaError;
            message = e.what();
        } catch (const ConfigError& e) {
            code = kConfigError;
            message = e.what();
        } catch (const DomainError& e) {
            code = kConfigError;
            message = e.what();
        } catch (const DiagnosticError& e) {
            code = kNotConverged;
            message = e.what();
        } catch (const std::exception& e) {
            code = kFailure;
            message = e.what();
        }
        if (!message.empty()) err_ << command_ << ": " << message << '\n';
        try {
            write_manifest(code, message);
        } catch (const std::exception& e) {
            err_ << command_ << ": manifest not written: " << e.what() << '\n';
            if (code == kOk) code = kFailure;
        }
        return code;
    }

private:
    void write_manifest(int code, const std::string& message) {
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        Json m;
        m["command"] = command_;
        m["config"] = config;
        m["seed"] = seed ? Json(*seed) : Json(nullptr);
        m["version"] = kVersion;
        m["input_checksums"] = inputs_;
        m["outputs"] = outputs_;
        m["exit_code"] = code;
        if (!message.empty()) m["error"] = message;
        m["duration_seconds"] = seconds;
        fs::create_directories(out_dir_);
        std::ofstream out(out_dir_ / "manifest.json", std::ios::binary);
        out << m.dump(2) << '\n';
    }

    std::string command_;
    fs::path out_dir_;
    std::ostream& err_;
    std::chrono::steady_clock::time_point start_;
    Json inputs_ = Json::object();
    std::vector<std::string> outputs_;
};

inline Dataset read_input(Run& run, const fs::path& path) {
    const auto bytes = slurp(path);
    run.record_input(path, bytes);
    std::istringstream in(bytes);
    return io::read_dataset_csv(in);
}

inline BdgdParams params_from(const std::vector<double>& v, const char* flag) {
    if (v.size() != 5) throw ConfigError(std::string(flag) + " needs five values: alpha1,beta1,alpha2,beta2,phi");
    return BdgdParams::from_vector({v[0], v[1], v[2], v[3], v[4]});
}

inline Json to_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

inline Json to_json(const std::optional<Inference>& x) {
    if (!x) return nullptr;
    return {{"estimate", x->estimate}, {"std_error", x->std_error}, {"ci", to_json(x->ci)}, {"truncated", x->truncated}};
}

inline Json to_json(const Quantiles& q) { return {{"median", q.median}, {"cri", to_json(q.cri)}}; }

inline Json named(const ParamVector& v) {
    Json j = Json::object();
    for (std::size_t i = 0; i < 5; ++i) j[kParamNames[i]] = v[i];
    return j;
}

inline Json fit_json(const FitReport& r, double level) {
    Json j;
    j["estimates"] = named(r.estimates.to_vector());
    j["std_errors"] = r.std_errors ? named(*r.std_errors) : Json(nullptr);
    if (r.wald_intervals) {
        Json w = Json::object();
        for (std::size_t i = 0; i < 5; ++i) w[kParamNames[i]] = to_json((*r.wald_intervals)[i]);
        j["wald_intervals"] = w;
    } else {
        j["wald_intervals"] = nullptr;
    }
    if (r.covariance) {
        Json rows = Json::array();
        for (int i = 0; i < 5; ++i) {
            Json row = Json::array();
            for (int k = 0; k < 5; ++k) row.push_back((*r.covariance)(i, k));
            rows.push_back(row);
        }
        j["covariance"] = rows;
    } else {
        j["covariance"] = nullptr;
    }
    j["rho1"] = to_json(r.rho1);
    j["rho2"] = to_json(r.rho2);
    j["tau_k"] = to_json(r.tau_k);
    j["derived"] = {{"rho1", r.derived.rho1}, {"rho2", r.derived.rho2}, {"tau_k", r.derived.tau_k}, {"tau_s", r.derived.tau_s}};
    j["loglik_at_max"] = r.loglik_at_max;
    j["converged"] = r.converged;
    j["monotone_likelihood"] = r.monotone_likelihood;
    j["iterations"] = r.iterations;
    j["level"] = level;
    return j;
}

inline std::vector<double> time_grid(double tmax, std::size_t points = 200) {
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = 1.05 * tmax * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

/// Fitted survival and hazard on a grid plus Kaplan-Meier and binned-hazard references.
inline void write_curves(Run& run, const Dataset& data, const BdgdParams& est) {
    for (int m : {1, 2}) {
        const auto s = margin(data, m);
        const DGParams& g = m == 1 ? est.m1() : est.m2();
        const auto grid = time_grid(*std::max_element(s.times.begin(), s.times.end()));
        std::vector<std::pair<double, double>> surv, haz;
        for (double t : grid) {
            surv.emplace_back(t, survival(g, t));
            haz.emplace_back(t, hazard(g, t));
        }
        const auto tag = std::to_string(m);
        run.write("fit_survival_m" + tag + ".csv", [&](std::ostream& o) { io::write_xy_csv(o, "time", "survival", surv); });
        run.write("fit_hazard_m" + tag + ".csv", [&](std::ostream& o) { io::write_xy_csv(o, "time", "hazard", haz); });
        run.write("km_m" + tag + ".csv", [&](std::ostream& o) { io::write_km_csv(o, kaplan_meier(s)); });
        if (std::count(s.events.begin(), s.events.end(), 1) > 0) {
            const auto bins = binned_hazard(s, default_hazard_bins(s));
            run.write("hazard_bins_m" + tag + ".csv", [&](std::ostream& o) { io::write_hazard_csv(o, bins); });
        }
    }
}

}  // namespace detail

/// Maximum-likelihood fit of a dataset file.
inline int cmd_fit(const FitOptions& opt, std::ostream& err) {
    detail::Run run("fit", opt.out_dir, err);
    run.config = {{"input", opt.input.string()}, {"init", opt.init}, {"level", opt.level}};
    return run.execute([&] {
        FitConfig cfg;
        cfg.confidence_level = opt.level;
        if (!opt.init.empty()) cfg.initial = detail::params_from(opt.init, "--init");
        const Dataset data = detail::read_input(run, opt.input);
        const auto report = fit(data, cfg);
        run.write_json("fit_report.json", detail::fit_json(report, opt.level));
        detail::write_curves(run, data, report.estimates);
        if (report.monotone_likelihood) {
            err << "fit: monotone likelihood, estimates diverge\n";
            return static_cast<int>(kNotConverged);
        }
        if (!report.converged) {
            err << "fit: optimizer did not converge\n";
            return static_cast<int>(kNotConverged);
        }
        return static_cast<int>(kOk);
    });
}

/// Random-walk Metropolis under a uniform box prior.
inline int cmd_bayes(const BayesOptions& opt, std::ostream& err) {
    detail::Run run("bayes", opt.out_dir, err);
    run.seed = opt.seed;
    run.config = {{"input", opt.input.string()}, {"prior_box", opt.prior_box}, {"init", opt.init},
                  {"iterations", opt.iterations}, {"burn_in", opt.burn_in},  {"thin", opt.thin},
                  {"chains", opt.chains}};
    return run.execute([&] {
        PriorBox box;
        if (!opt.prior_box.empty()) {
            if (opt.prior_box.size() != 10) throw ConfigError("--prior-box needs ten values: lo,hi for each parameter");
            for (std::size_t i = 0; i < 5; ++i) box.bounds[i] = {opt.prior_box[2 * i], opt.prior_box[2 * i + 1]};
        }
        box.validate();
        McmcConfig cfg;
        cfg.iterations = opt.iterations;
        cfg.burn_in = opt.burn_in;
        cfg.thin = opt.thin;
        cfg.seed = opt.seed;
        if (!opt.init.empty()) cfg.initial = detail::params_from(opt.init, "--init");
        cfg.validate();
        const Dataset data = detail::read_input(run, opt.input);
        const auto s = run_chains(data, box, cfg, opt.chains);

        Json j;
        Json params = Json::object();
        for (std::size_t i = 0; i < 5; ++i) params[kParamNames[i]] = detail::to_json(s.params[i]);
        j["params"] = params;
        j["rho1"] = detail::to_json(s.rho1);
        j["rho2"] = detail::to_json(s.rho2);
        j["tau_k"] = detail::to_json(s.tau_k);
        j["tau_s"] = detail::to_json(s.tau_s);
        j["acceptance_rates"] = detail::named(s.acceptance_rates);
        j["proposal_scales"] = detail::named(s.proposal_scales);
        j["retained_draws"] = s.retained_draws;
        Json ess = Json::object();
        try {
            const auto diag = chain_diagnostics(s.chain);
            for (std::size_t i = 0; i < 5; ++i) ess[kParamNames[i]] = diag[i].ess;
        } catch (const DiagnosticError& e) {
            err << "bayes: diagnostics unavailable: " << e.what() << '\n';
            ess = nullptr;
        }
        j["ess"] = ess;
        run.write_json("posterior.json", j);
        run.write("chain.csv", [&](std::ostream& o) { io::write_chain_csv(o, s.chain); });
        return static_cast<int>(kOk);
    });
}

/// Synthetic dataset from a catalog scenario or explicit parameters.
inline int cmd_simulate(const SimulateOptions& opt, std::ostream& err) {
    detail::Run run("simulate", opt.out_dir, err);
    run.seed = opt.seed;
    run.config = {{"scenario", opt.scenario ? Json(*opt.scenario) : Json(nullptr)},
                  {"params", opt.params},
                  {"phi", opt.phi ? Json(*opt.phi) : Json(nullptr)},
                  {"n", opt.n},
                  {"output", opt.output}};
    return run.execute([&] {
        if (opt.scenario && !opt.params.empty()) throw ConfigError("give either --scenario or --params, not both");
        ParamVector v = opt.scenario ? scenario(*opt.scenario).params.to_vector()
                        : !opt.params.empty() ? detail::params_from(opt.params, "--params").to_vector()
                                              : scenario(1).params.to_vector();
        if (opt.phi) v[4] = *opt.phi;
        const auto params = BdgdParams::from_vector(v);
        run.config["resolved_params"] = detail::named(v);
        const auto data = generate({params, opt.n, opt.seed});
        run.write(opt.output, [&](std::ostream& o) { io::write_dataset_csv(o, data); });
        return static_cast<int>(kOk);
    });
}

/// Monte-Carlo study over scenarios and sample sizes.
inline int cmd_study(const StudyOptions& opt, std::ostream& err) {
    detail::Run run("study", opt.out_dir, err);
    run.seed = opt.seed;
    run.config = {{"scenarios", opt.scenarios}, {"sizes", opt.sizes}, {"replicates", opt.replicates},
                  {"level", opt.level},         {"boxplot", opt.boxplot}};
    return run.execute([&] {
        StudyConfig cfg;
        cfg.scenarios = opt.scenarios;
        cfg.sample_sizes = opt.sizes;
        cfg.replicates = opt.replicates;
        cfg.seed = opt.seed;
        cfg.nominal_coverage = opt.level;
        cfg.fit.confidence_level = opt.level;
        cfg.threads = opt.threads;
        cfg.validate();
        for (const auto& name : opt.boxplot) tracked_index(name);
        const auto result = run_study(cfg);
        for (int id : opt.scenarios) {
            const auto tag = std::to_string(id);
            run.write("study_scenario" + tag + ".csv", [&](std::ostream& o) { io::write_study_csv(o, result, id); });
            for (const auto& name : opt.boxplot) {
                const auto rows = export_boxplot_series(result, name, id);
                run.write("boxplot_" + name + "_scenario" + tag + ".csv",
                          [&](std::ostream& o) { io::write_boxplot_csv(o, rows); });
            }
        }
        return static_cast<int>(kOk);
    });
}

}  // namespace defectiva::cli
