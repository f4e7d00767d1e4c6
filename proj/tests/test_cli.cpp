#include "catch_amalgamated.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"

using namespace defectiva;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("defectiva_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

fs::path dataset_file(const fs::path& dir, const Dataset& d) {
    const auto p = dir / "input.csv";
    std::ofstream out(p, std::ios::binary);
    io::write_dataset_csv(out, d);
    return p;
}

cli::Json read_json(const fs::path& p) { return cli::Json::parse(read_file(p)); }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }
}  // namespace

TEST_CASE("FNV-1a digest", "[cli]") {
    CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(cli::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("fit command on a synthetic file", "[cli][montecarlo]") {
    const auto dir = scratch("fit");
    const auto input = dataset_file(dir, generate({scenario(1).params, 1000, 2025}));
    std::ostringstream err;
    cli::FitOptions opt;
    opt.input = input;
    opt.out_dir = dir / "out";
    REQUIRE(cli::cmd_fit(opt, err) == cli::kOk);
    INFO(err.str());

    const auto j = read_json(dir / "out" / "fit_report.json");
    CHECK(j["converged"] == true);
    CHECK(j["monotone_likelihood"] == false);
    for (const auto* name : kParamNames) {
        INFO(name);
        CHECK(std::isfinite(j["estimates"][name].get<double>()));
        CHECK(std::isfinite(j["std_errors"][name].get<double>()));
        CHECK(j["std_errors"][name].get<double>() > 0.0);
    }
    for (const auto* name : {"rho1", "rho2", "tau_k"}) {
        INFO(name);
        CHECK(std::isfinite(j[name]["estimate"].get<double>()));
        CHECK(std::isfinite(j[name]["std_error"].get<double>()));
    }
    CHECK(j["covariance"].size() == 5);

    for (const auto* f : {"fit_survival_m1.csv", "fit_hazard_m2.csv", "km_m1.csv", "hazard_bins_m2.csv"})
        CHECK(fs::exists(dir / "out" / f));
    const auto surv = read_file(dir / "out" / "fit_survival_m1.csv");
    CHECK(line_count(surv) == 201);
    CHECK(surv.rfind("time,survival\n0,1\n", 0) == 0);

    const auto manifest = read_json(dir / "out" / "manifest.json");
    CHECK(manifest["command"] == "fit");
    CHECK(manifest["exit_code"] == 0);
    CHECK(manifest["version"] == kVersion);
    CHECK(manifest["input_checksums"][input.string()] == cli::fnv1a_hex(read_file(input)));
    CHECK(manifest["outputs"].size() >= 9);
}

TEST_CASE("fit command error paths", "[cli]") {
    const auto dir = scratch("fit_errors");
    std::ostringstream err;
    cli::FitOptions opt;
    opt.out_dir = dir / "out";

    opt.input = dir / "negative.csv";
    write_file(opt.input, "t1,delta1,t2,delta2\n1,1,2,0\n-0.5,0,1,1\n");
    CHECK(cli::cmd_fit(opt, err) == cli::kSchemaError);
    CHECK(err.str().find("row 3") != std::string::npos);
    CHECK(read_json(dir / "out" / "manifest.json")["exit_code"] == cli::kSchemaError);

    opt.input = dir / "censored.csv";
    write_file(opt.input, "t1,delta1,t2,delta2\n1,0,2,0\n2,0,1,0\n3,0,4,0\n4,0,3,0\n");
    CHECK(cli::cmd_fit(opt, err) == cli::kNotConverged);
    CHECK(read_json(dir / "out" / "fit_report.json")["monotone_likelihood"] == true);

    opt.input = dir / "missing.csv";
    CHECK(cli::cmd_fit(opt, err) == cli::kSchemaError);

    opt.input = dir / "negative.csv";
    opt.init = {1.0, 0.8, 1.0};
    CHECK(cli::cmd_fit(opt, err) == cli::kConfigError);
}

TEST_CASE("bayes command", "[cli]") {
    const auto dir = scratch("bayes");
    const auto truth = scenario(1).params;
    const auto input = dataset_file(dir, generate({truth, 200, 77}));
    std::ostringstream err;
    cli::BayesOptions opt;
    opt.input = input;
    opt.out_dir = dir / "tiny";
    opt.iterations = 4000;
    opt.burn_in = 1000;
    opt.thin = 10;
    const double eps = 1e-3;
    const auto tv = truth.to_vector();
    for (double v : tv) {
        opt.prior_box.push_back(v - eps / 2);
        opt.prior_box.push_back(v + eps / 2);
    }
    REQUIRE(cli::cmd_bayes(opt, err) == cli::kOk);
    INFO(err.str());
    const auto j = read_json(dir / "tiny" / "posterior.json");
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(j["params"][kParamNames[i]]["median"].get<double>() == Approx(tv[i]).margin(eps / 2));
    CHECK(j["retained_draws"] == 300);
    CHECK(line_count(read_file(dir / "tiny" / "chain.csv")) == 301);
    const auto first = read_file(dir / "tiny" / "chain.csv");
    REQUIRE(cli::cmd_bayes(opt, err) == cli::kOk);
    CHECK(read_file(dir / "tiny" / "chain.csv") == first);

    // degenerate box: the likelihood cannot be evaluated at the starting point
    opt.out_dir = dir / "bad";
    opt.prior_box = {1e299, 1e300, 1e-300, 1e-299, 0.5, 1.5, 0.5, 1.5, 0.5, 1.5};
    CHECK(cli::cmd_bayes(opt, err) == cli::kConfigError);
    CHECK_FALSE(fs::exists(dir / "bad" / "posterior.json"));
    CHECK(fs::exists(dir / "bad" / "manifest.json"));

    opt.prior_box = {2.0, 1.0, 0.0, 10.0, 0.0, 10.0, 0.0, 10.0, 0.0, 50.0};
    CHECK(cli::cmd_bayes(opt, err) == cli::kConfigError);
    opt.prior_box = {0.0, 1.0};
    CHECK(cli::cmd_bayes(opt, err) == cli::kConfigError);
}

TEST_CASE("simulate command", "[cli]") {
    const auto dir = scratch("simulate");
    std::ostringstream err;
    cli::SimulateOptions opt;
    opt.out_dir = dir;
    opt.scenario = 1;
    opt.n = 100;
    opt.seed = 7;
    opt.output = "a.csv";
    REQUIRE(cli::cmd_simulate(opt, err) == cli::kOk);
    opt.output = "b.csv";
    REQUIRE(cli::cmd_simulate(opt, err) == cli::kOk);
    const auto a = read_file(dir / "a.csv");
    CHECK(a == read_file(dir / "b.csv"));
    CHECK(line_count(a) == 101);
    CHECK(read_json(dir / "manifest.json")["seed"] == 7);

    opt.scenario = 12;
    opt.n = 2000;
    opt.output = "s12.csv";
    REQUIRE(cli::cmd_simulate(opt, err) == cli::kOk);
    std::ifstream in(dir / "s12.csv");
    const auto d = io::read_dataset_csv(in);
    double c1 = 0, c2 = 0;
    for (const auto& o : d) {
        c1 += 1 - o.delta1;
        c2 += 1 - o.delta2;
    }
    CHECK(c1 / 2000.0 >= cure_rate(scenario(12).params.m1()));
    CHECK(c2 / 2000.0 >= cure_rate(scenario(12).params.m2()));

    opt.phi = 0.0;
    CHECK(cli::cmd_simulate(opt, err) == cli::kConfigError);
    opt.phi = -1.0;
    CHECK(cli::cmd_simulate(opt, err) == cli::kConfigError);
    opt.phi.reset();
    opt.scenario = 13;
    CHECK(cli::cmd_simulate(opt, err) == cli::kConfigError);
    opt.scenario.reset();
    opt.params = {1.0, 0.8, 1.0, 0.8, 2.0};
    opt.output = "explicit.csv";
    CHECK(cli::cmd_simulate(opt, err) == cli::kOk);
    opt.scenario = 2;
    CHECK(cli::cmd_simulate(opt, err) == cli::kConfigError);
}

TEST_CASE("study command", "[cli][montecarlo]") {
    const auto dir = scratch("study");
    std::ostringstream err;
    cli::StudyOptions opt;
    opt.out_dir = dir / "one";
    opt.sizes = {100, 200};
    opt.replicates = 50;
    opt.boxplot = {"rho1"};
    REQUIRE(cli::cmd_study(opt, err) == cli::kOk);
    const auto csv = read_file(dir / "one" / "study_scenario1.csv");
    CHECK(line_count(csv) == 1 + 2 * kTracked);
    for (const auto* name : kTrackedNames) {
        const std::string key = std::string(",") + name + ",";
        std::size_t hits = 0;
        for (auto pos = csv.find(key); pos != std::string::npos; pos = csv.find(key, pos + 1)) ++hits;
        INFO(name);
        CHECK(hits == 2);
    }
    const auto band = coverage_band(50, 0.95);
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        REQUIRE(f.size() == 9);
        CHECK(std::stod(f[5]) == band.lo);
        CHECK(std::stod(f[6]) == band.hi);
    }
    CHECK(line_count(read_file(dir / "one" / "boxplot_rho1_scenario1.csv")) > 50);

    opt.out_dir = dir / "two";
    opt.threads = 2;
    REQUIRE(cli::cmd_study(opt, err) == cli::kOk);
    CHECK(read_file(dir / "two" / "study_scenario1.csv") == csv);
    CHECK(read_file(dir / "two" / "boxplot_rho1_scenario1.csv") == read_file(dir / "one" / "boxplot_rho1_scenario1.csv"));

    opt.replicates = 1;
    CHECK(cli::cmd_study(opt, err) == cli::kConfigError);
    opt.replicates = 50;
    opt.boxplot = {"gamma"};
    CHECK(cli::cmd_study(opt, err) == cli::kConfigError);
}
