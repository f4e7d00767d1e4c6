#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "defectiva/bdgd.hpp"
#include "defectiva/error.hpp"

namespace defectiva {

/// Right-censored univariate sample; events[i] = 1 marks an observed event.
struct UnivariateSample {
    std::vector<double> times;
    std::vector<int> events;

    void validate() const {
        if (times.empty()) throw DataError("univariate sample is empty");
        if (times.size() != events.size()) throw DataError("times and events differ in length");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(times[i] > 0.0) || !std::isfinite(times[i])) throw DataError("time must be positive and finite", i);
            if (events[i] != 0 && events[i] != 1) throw DataError("event indicator must be 0 or 1", i);
        }
    }
};

inline UnivariateSample margin(const Dataset& data, int which) {
    UnivariateSample s;
    s.times.reserve(data.size());
    s.events.reserve(data.size());
    for (const auto& o : data) {
        s.times.push_back(which == 1 ? o.t1 : o.t2);
        s.events.push_back(which == 1 ? o.delta1 : o.delta2);
    }
    return s;
}

/// Right-continuous step function. knots are the distinct event times;
/// values[k] is the level from knots[k] on, and the level before the first
/// knot is 1.
struct StepCurve {
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<std::size_t> at_risk;

    double at(double t) const {
        const auto it = std::upper_bound(knots.begin(), knots.end(), t);
        if (it == knots.begin()) return 1.0;
        return values[static_cast<std::size_t>(it - knots.begin()) - 1];
    }
};

/// Product-limit estimator. At tied times events are counted before
/// censorings, i.e. subjects censored at t are still at risk at t.
inline StepCurve kaplan_meier(const UnivariateSample& s) {
    s.validate();
    std::vector<std::size_t> idx(s.times.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.times[a] < s.times[b]; });

    StepCurve curve;
    double level = 1.0;
    std::size_t at_risk = idx.size();
    for (std::size_t k = 0; k < idx.size();) {
        const double t = s.times[idx[k]];
        std::size_t events = 0, leaving = 0;
        while (k < idx.size() && s.times[idx[k]] == t) {
            events += static_cast<std::size_t>(s.events[idx[k]]);
            ++leaving;
            ++k;
        }
        if (events > 0) {
            level *= static_cast<double>(at_risk - events) / static_cast<double>(at_risk);
            curve.knots.push_back(t);
            curve.values.push_back(level);
            curve.at_risk.push_back(at_risk);
        }
        at_risk -= leaving;
    }
    return curve;
}

struct HazardBin {
    double midpoint;
    double hazard;
};

/// Default bin count: ceil(sqrt(number of events)).
inline std::size_t default_hazard_bins(const UnivariateSample& s) {
    const auto events = std::count(s.events.begin(), s.events.end(), 1);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(events)))));
}

/// Piecewise-constant occurrence/exposure hazard on equal-width bins over
/// (0, max time]. Bins with no exposure produce no row.
inline std::vector<HazardBin> binned_hazard(const UnivariateSample& s, std::size_t bins) {
    s.validate();
    if (bins == 0) throw DomainError("binned_hazard: bin count must be positive");
    if (std::count(s.events.begin(), s.events.end(), 1) == 0) throw DataError("binned_hazard: sample has no events");

    const double tmax = *std::max_element(s.times.begin(), s.times.end());
    const double width = tmax / static_cast<double>(bins);
    std::vector<double> events(bins, 0.0), exposure(bins, 0.0);
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const double t = s.times[i];
        // bin k covers (k w, (k+1) w]
        const auto last = std::min(bins - 1, static_cast<std::size_t>(std::ceil(t / width)) - 1);
        for (std::size_t k = 0; k < last; ++k) exposure[k] += width;
        exposure[last] += t - static_cast<double>(last) * width;
        if (s.events[i] == 1) events[last] += 1.0;
    }
    std::vector<HazardBin> out;
    for (std::size_t k = 0; k < bins; ++k) {
        if (exposure[k] <= 0.0) continue;
        out.push_back({(static_cast<double>(k) + 0.5) * width, events[k] / exposure[k]});
    }
    return out;
}

}  // namespace defectiva
