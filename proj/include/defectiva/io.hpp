#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "defectiva/bayes.hpp"
#include "defectiva/bdgd.hpp"
#include "defectiva/error.hpp"
#include "defectiva/nonparam.hpp"
#include "defectiva/study.hpp"

namespace defectiva::io {

inline constexpr std::string_view kDatasetHeader = "t1,delta1,t2,delta2";

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view chomp(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

inline double parse_time(std::string_view field, std::size_t line, const char* name) {
    double v = 0.0;
    const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || r.ec != std::errc{} || r.ptr != field.data() + field.size())
        throw DataError(std::string("cannot parse ") + name + " '" + std::string(field) + "'", line);
    return v;
}

inline int parse_indicator(std::string_view field, std::size_t line, const char* name) {
    if (field == "0") return 0;
    if (field == "1") return 1;
    throw DataError(std::string(name) + " must be 0 or 1, got '" + std::string(field) + "'", line);
}

}  // namespace detail

/// Parse the `t1,delta1,t2,delta2` schema. Errors carry the 1-based line
/// number of the offending row (the header is line 1).
inline Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty input: expected header t1,delta1,t2,delta2");
    if (detail::chomp(line) != kDatasetHeader)
        throw DataError("bad header '" + std::string(detail::chomp(line)) + "', expected t1,delta1,t2,delta2", 1);
    std::vector<BivObs> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::chomp(line);
        if (text.empty()) continue;
        const auto f = detail::split(text);
        if (f.size() != 4) throw DataError("expected 4 fields, got " + std::to_string(f.size()), lineno);
        const BivObs o{detail::parse_time(f[0], lineno, "t1"), detail::parse_indicator(f[1], lineno, "delta1"),
                       detail::parse_time(f[2], lineno, "t2"), detail::parse_indicator(f[3], lineno, "delta2")};
        validate(o, lineno);
        rows.push_back(o);
    }
    if (rows.empty()) throw DataError("input has a header but no rows");
    return Dataset(std::move(rows));
}

inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
    out << kDatasetHeader << '\n';
    for (const auto& o : data)
        out << format_double(o.t1) << ',' << o.delta1 << ',' << format_double(o.t2) << ',' << o.delta2 << '\n';
}

/// Two-column numeric table with a header line.
inline void write_xy_csv(std::ostream& out, std::string_view x_name, std::string_view y_name,
                         const std::vector<std::pair<double, double>>& rows) {
    out << x_name << ',' << y_name << '\n';
    for (const auto& [x, y] : rows) out << format_double(x) << ',' << format_double(y) << '\n';
}

/// Kaplan-Meier curve as (time, survival), starting from (0, 1).
inline void write_km_csv(std::ostream& out, const StepCurve& curve) {
    std::vector<std::pair<double, double>> rows{{0.0, 1.0}};
    for (std::size_t k = 0; k < curve.knots.size(); ++k) rows.emplace_back(curve.knots[k], curve.values[k]);
    write_xy_csv(out, "time", "survival", rows);
}

inline void write_hazard_csv(std::ostream& out, const std::vector<HazardBin>& bins) {
    std::vector<std::pair<double, double>> rows;
    for (const auto& b : bins) rows.emplace_back(b.midpoint, b.hazard);
    write_xy_csv(out, "midpoint", "hazard", rows);
}

inline void write_chain_csv(std::ostream& out, const std::vector<ChainDraw>& chain) {
    out << "iteration,alpha1,beta1,alpha2,beta2,phi\n";
    for (const auto& d : chain) {
        out << d.iteration;
        for (double v : d.theta) out << ',' << format_double(v);
        out << '\n';
    }
}

/// Per-scenario summary: one row per (n, tracked quantity).
inline void write_study_csv(std::ostream& out, const StudyResult& result, int scenario_id) {
    out << "n,parameter,bias,mse,coverage,band_lo,band_hi,n_monotone,n_failed\n";
    for (const auto& c : result.cells) {
        if (c.scenario != scenario_id) continue;
        for (const auto& p : c.parameters) {
            out << c.n << ',' << p.name << ',' << format_double(c.populated ? p.bias : std::nan("")) << ','
                << format_double(c.populated ? p.mse : std::nan("")) << ','
                << format_double(c.populated ? p.coverage : std::nan("")) << ',' << format_double(result.band.lo)
                << ',' << format_double(result.band.hi) << ',' << c.monotone << ',' << c.failed << '\n';
        }
    }
}

inline void write_boxplot_csv(std::ostream& out, const std::vector<BoxplotRow>& rows) {
    out << "n,estimate,nominal\n";
    for (const auto& r : rows) out << r.n << ',' << format_double(r.estimate) << ',' << format_double(r.nominal) << '\n';
}

}  // namespace defectiva::io
