#pragma once

// Quadrature drivers: adaptive Gauss-Kronrod panels for the radial integral
// and geometrically graded Gauss-Legendre panels for integrands with
// algebraic endpoint singularities. Node tables come from Boost.Math.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gmeans::quadrature {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool depth_limited = false;
};

/// One G7-K15 panel. Returns the Kronrod value, |K - G| as error.
template <class F>
Estimate gk15(F& f, double a, double b)
{
    using K = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = K::abscissa();
    const auto& wk = K::weights();
    const auto& wg = G::weights();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    const double f0 = f(c);
    double kronrod = wk[0] * f0;
    double gauss = wg[0] * f0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double s = f(c - h * xk[i]) + f(c + h * xk[i]);
        kronrod += wk[i] * s;
        // Gauss nodes sit at the even Kronrod indices.
        if (i % 2 == 0) gauss += wg[i / 2] * s;
    }
    return {kronrod * h, std::abs((kronrod - gauss) * h), 2 * xk.size() - 1, false};
}

namespace detail {

template <class F>
void adapt(F& f, double a, double b, const Estimate& whole, double tol, double scale, double width, int depth,
           Estimate& total)
{
    const double local = tol * std::max(std::abs(whole.value), scale * (b - a) / width);
    if (whole.error <= local || depth == 0) {
        total.value += whole.value;
        total.error += whole.error;
        if (depth == 0 && whole.error > local) total.depth_limited = true;
        return;
    }
    const double m = 0.5 * (a + b);
    const Estimate left = gk15(f, a, m);
    const Estimate right = gk15(f, m, b);
    total.evaluations += left.evaluations + right.evaluations;
    adapt(f, a, m, left, tol, scale, width, depth - 1, total);
    adapt(f, m, b, right, tol, scale, width, depth - 1, total);
}

} // namespace detail

/// Adaptive bisection over G7-K15 panels. A panel of width w is accepted once
/// its Kronrod/Gauss difference is below tol * max(|panel|, |I| * w / (b - a)),
/// which keeps integrable endpoint singularities from stalling the recursion.
template <class F>
Estimate adaptive(F&& f, double a, double b, double tol, int max_depth = 50)
{
    if (!(b > a)) return {};
    Estimate whole = gk15(f, a, b);
    Estimate total;
    total.evaluations = whole.evaluations;
    detail::adapt(f, a, b, whole, tol, std::abs(whole.value), b - a, max_depth, total);
    return total;
}

/// Visits Gauss-Legendre nodes of a composite rule on [a, b] whose panels
/// shrink geometrically (ratio 1/2) toward both endpoints. `visit(t, w)` is
/// called once per node.
template <int Order = 20, class Visit>
void graded_nodes(double a, double b, int levels, Visit&& visit)
{
    using G = boost::math::quadrature::gauss<double, Order>;
    const auto& xg = G::abscissa();
    const auto& wg = G::weights();
    const auto panel = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < xg.size(); ++i) {
            if (xg[i] == 0.0) {
                visit(c, h * wg[i]);
            } else {
                visit(c - h * xg[i], h * wg[i]);
                visit(c + h * xg[i], h * wg[i]);
            }
        }
    };
    const double m = 0.5 * (a + b);
    const double half = m - a;
    double outer = 1.0;
    for (int j = 0; j < levels; ++j) {
        const double inner = 0.5 * outer;
        panel(a + half * inner, a + half * outer);
        panel(b - half * outer, b - half * inner);
        outer = inner;
    }
    panel(a, a + half * outer);
    panel(b - half * outer, b);
}

} // namespace gmeans::quadrature
