#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace opotk::detail {

/// Golden-section minimization of a unimodal-enough smooth function on
/// [lo, hi] to an abscissa tolerance.
inline double golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);
    // Return the best sampled point, never a worse midpoint.
    const double fm = f(mid);
    if (fc <= fm && fc <= fd)
        return c;
    if (fd <= fm)
        return d;
    return mid;
}

struct NelderMeadResult {
    std::vector<double> x;
    double fmin = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Standard Nelder-Mead on a few dimensions. `scale` sets the initial
/// simplex edge per coordinate. Bounds are the caller's business (penalty
/// in the objective).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, std::vector<double> scale,
                                    double xtol, double ftol, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i)
        simplex[i + 1][i] += scale[i];
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        fv[i] = f(simplex[i]);

    NelderMeadResult result;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        // Order best..worst.
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        {
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (std::size_t i : idx) {
                s2.push_back(simplex[i]);
                f2.push_back(fv[i]);
            }
            simplex.swap(s2);
            fv.swap(f2);
        }

        double size = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                size = std::max(size, std::abs(simplex[i][j] - simplex[0][j]));
        if (size < xtol && std::abs(fv[n] - fv[0]) < ftol) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                centroid[j] += simplex[i][j] / static_cast<double>(n);

        const auto blend = [&](double coeff) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + coeff * (simplex[n][j] - centroid[j]);
            return p;
        };

        const auto reflected = blend(-1.0);
        const double fr = f(reflected);
        if (fr < fv[0]) {
            const auto expanded = blend(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[n] = expanded;
                fv[n] = fe;
            } else {
                simplex[n] = reflected;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = reflected;
            fv[n] = fr;
        } else {
            const auto contracted = blend(fr < fv[n] ? -0.5 : 0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, fv[n])) {
                simplex[n] = contracted;
                fv[n] = fc;
            } else {
                // Shrink toward the best vertex.
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[best])
            best = i;
    result.x = simplex[best];
    result.fmin = fv[best];
    result.iterations = iter;
    return result;
}

} // namespace opotk::detail
