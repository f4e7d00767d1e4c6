#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace defectiva {

struct NelderMeadOptions {
    int max_iterations = 5000;
    double tolerance = 1e-8;  ///< absolute spread of function values across the simplex
    int max_restarts = 3;
};

template <std::size_t N>
struct NelderMeadResult {
    std::array<double, N> x{};
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    bool stopped = false;  ///< the stop predicate fired
};

namespace detail {
struct NeverStop {
    template <class X>
    bool operator()(const X&, double) const noexcept { return false; }
};
}  // namespace detail

/// Minimize `f` by the Nelder-Mead simplex (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). The initial simplex is `start` plus one vertex
/// per coordinate offset by `steps[i]`. On convergence the simplex is rebuilt
/// around the best vertex and the search restarted, up to `max_restarts` times,
/// until a restart fails to improve the value. `stop(x, f)` is checked on the
/// best vertex after every iteration.
template <std::size_t N, class F, class Stop = detail::NeverStop>
NelderMeadResult<N> nelder_mead(F&& f, std::array<double, N> start, const std::array<double, N>& steps,
                                const NelderMeadOptions& opt = {}, Stop&& stop = {}) {
    using Point = std::array<double, N>;
    NelderMeadResult<N> result;
    result.x = start;
    result.value = f(start);

    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        std::array<Point, N + 1> simplex;
        std::array<double, N + 1> values;
        simplex[0] = result.x;
        values[0] = result.value;
        for (std::size_t i = 0; i < N; ++i) {
            simplex[i + 1] = result.x;
            simplex[i + 1][i] += steps[i];
            values[i + 1] = f(simplex[i + 1]);
        }

        std::array<std::size_t, N + 1> order;
        bool converged = false;
        while (result.iterations < opt.max_iterations) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
            const std::size_t best = order.front(), worst = order.back(), second = order[N - 1];

            if (stop(simplex[best], values[best])) {
                result.x = simplex[best];
                result.value = values[best];
                result.stopped = true;
                return result;
            }
            const double spread = std::abs(values[worst] - values[best]);
            if (std::isfinite(values[worst]) && spread <= opt.tolerance) {
                converged = true;
                break;
            }
            ++result.iterations;

            Point centroid{};
            for (std::size_t k = 0; k <= N; ++k) {
                if (k == worst) continue;
                for (std::size_t i = 0; i < N; ++i) centroid[i] += simplex[k][i] / static_cast<double>(N);
            }
            const auto along = [&](double t) {
                Point p;
                for (std::size_t i = 0; i < N; ++i) p[i] = centroid[i] + t * (simplex[worst][i] - centroid[i]);
                return p;
            };

            const Point reflected = along(-1.0);
            const double fr = f(reflected);
            if (fr < values[best]) {
                const Point expanded = along(-2.0);
                const double fe = f(expanded);
                if (fe < fr) {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
                continue;
            }
            if (fr < values[second]) {
                simplex[worst] = reflected;
                values[worst] = fr;
                continue;
            }
            const bool outside = fr < values[worst];
            const Point contracted = along(outside ? -0.5 : 0.5);
            const double fc = f(contracted);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = contracted;
                values[worst] = fc;
                continue;
            }
            for (std::size_t k = 0; k <= N; ++k) {
                if (k == best) continue;
                for (std::size_t i = 0; i < N; ++i) simplex[k][i] = simplex[best][i] + 0.5 * (simplex[k][i] - simplex[best][i]);
                values[k] = f(simplex[k]);
            }
        }

        const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
        const double previous = result.value;
        result.x = simplex[best];
        result.value = values[best];
        result.converged = converged;
        if (!converged) return result;
        if (restart > 0 && std::abs(previous - result.value) <= opt.tolerance)
            return result;
    }
    return result;
}

/// Central-difference Hessian of `f` at `x` with per-coordinate steps
/// h_i = rel_step * max(|x_i|, 1e-8). Symmetric by construction.
template <std::size_t N, class F>
std::array<std::array<double, N>, N> numerical_hessian(F&& f, const std::array<double, N>& x, double rel_step) {
    std::array<double, N> h;
    for (std::size_t i = 0; i < N; ++i) h[i] = rel_step * std::max(std::abs(x[i]), 1e-8);
    const double f0 = f(x);
    std::array<std::array<double, N>, N> hess{};
    const auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
        auto p = x;
        p[i] += si * h[i];
        p[j] += sj * h[j];
        return f(p);
    };
    for (std::size_t i = 0; i < N; ++i) {
        hess[i][i] = (at(i, 1.0, i, 0.0) - 2.0 * f0 + at(i, -1.0, i, 0.0)) / (h[i] * h[i]);
        for (std::size_t j = i + 1; j < N; ++j) {
            const double v = (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0) + at(i, -1.0, j, -1.0)) /
                             (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    return hess;
}

}  // namespace defectiva
