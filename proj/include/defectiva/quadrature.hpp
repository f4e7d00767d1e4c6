#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "defectiva/error.hpp"

namespace defectiva::quadrature {

/// Gauss-Legendre rule on [-1, 1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes and weights by Newton iteration on P_n, using the symmetry of the rule.
inline Rule gauss_legendre(std::size_t n) {
    Rule rule{std::vector<double>(n), std::vector<double>(n)};
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                const double jj = static_cast<double>(j);
                p0 = ((2.0 * jj + 1.0) * z * p1 - jj * p2) / (jj + 1.0);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

struct Options {
    double tolerance = 1e-6;  ///< absolute, distributed over panels by size
    std::size_t order = 8;
    int max_depth = 40;
};

namespace detail {

template <class F>
double panel_1d(const Rule& rule, F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

template <class F>
double panel_2d(const Rule& rule, F& f, double x0, double x1, double y0, double y1) {
    const double hx = 0.5 * (x1 - x0), mx = 0.5 * (x0 + x1);
    const double hy = 0.5 * (y1 - y0), my = 0.5 * (y0 + y1);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = mx + hx * rule.nodes[i];
        double row = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) row += rule.weights[j] * f(x, my + hy * rule.nodes[j]);
        sum += rule.weights[i] * row;
    }
    return hx * hy * sum;
}

}  // namespace detail

/// Adaptive Gauss-Legendre on [a, b]: a panel is accepted when its estimate
/// and the sum over its two halves agree to the panel's share of the tolerance.
template <class F>
double integrate(F&& f, double a, double b, const Options& opt = {}) {
    const Rule rule = gauss_legendre(opt.order);
    const double width = b - a;
    struct Panel { double a, b, estimate; int depth; };
    std::vector<Panel> stack{{a, b, detail::panel_1d(rule, f, a, b), 0}};
    double total = 0.0;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double m = 0.5 * (p.a + p.b);
        const double left = detail::panel_1d(rule, f, p.a, m);
        const double right = detail::panel_1d(rule, f, m, p.b);
        const double refined = left + right;
        if (std::abs(refined - p.estimate) <= opt.tolerance * (p.b - p.a) / width) {
            total += refined;
            continue;
        }
        if (p.depth >= opt.max_depth) throw QuadratureError("1-D quadrature did not converge");
        stack.push_back({m, p.b, right, p.depth + 1});
        stack.push_back({p.a, m, left, p.depth + 1});
    }
    return total;
}

/// Adaptive tensor-product Gauss-Legendre over [x0,x1] x [y0,y1]. Each panel is
/// compared against the sum of its four quadrants and split until they agree
/// to the panel's area share of the tolerance.
template <class F>
double integrate_2d(F&& f, double x0, double x1, double y0, double y1, const Options& opt = {}) {
    const Rule rule = gauss_legendre(opt.order);
    const double area = (x1 - x0) * (y1 - y0);
    struct Panel { double x0, x1, y0, y1, estimate; int depth; };
    std::vector<Panel> stack{{x0, x1, y0, y1, detail::panel_2d(rule, f, x0, x1, y0, y1), 0}};
    double total = 0.0;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double mx = 0.5 * (p.x0 + p.x1);
        const double my = 0.5 * (p.y0 + p.y1);
        const std::array<Panel, 4> kids{{
            {p.x0, mx, p.y0, my, detail::panel_2d(rule, f, p.x0, mx, p.y0, my), p.depth + 1},
            {mx, p.x1, p.y0, my, detail::panel_2d(rule, f, mx, p.x1, p.y0, my), p.depth + 1},
            {p.x0, mx, my, p.y1, detail::panel_2d(rule, f, p.x0, mx, my, p.y1), p.depth + 1},
            {mx, p.x1, my, p.y1, detail::panel_2d(rule, f, mx, p.x1, my, p.y1), p.depth + 1},
        }};
        const double refined = kids[0].estimate + kids[1].estimate + kids[2].estimate + kids[3].estimate;
        const double share = (p.x1 - p.x0) * (p.y1 - p.y0) / area;
        if (std::abs(refined - p.estimate) <= opt.tolerance * share) {
            total += refined;
            continue;
        }
        if (p.depth >= opt.max_depth) throw QuadratureError("2-D quadrature did not converge");
        for (const auto& k : kids) stack.push_back(k);
    }
    return total;
}

}  // namespace defectiva::quadrature
