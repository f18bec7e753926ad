#pragma once

// Circle means M(x) = int_0^{2pi} |f(sqrt(x) e^{i theta})|^p d theta, the
// weighted accumulation h(x) = int_0^x M(t) e^{-alpha t} dt and the Gaussian
// integral mean h / (2 pi phi).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "entire_function.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "special_fn.hpp"

namespace gmeans {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct MeanParams {
    double p = 2.0;
    double alpha = 0.0;

    MeanParams(double p_, double alpha_) : p(p_), alpha(alpha_)
    {
        if (!(p_ > 0.0) || !std::isfinite(p_)) throw domain_fault("p must be positive");
        if (!std::isfinite(alpha_)) throw domain_fault("alpha must be finite");
    }
};

/// M(x) together with M'(x), M''(x).
struct CircleMean {
    double x = 0.0;
    double value = 0.0;
    double quadrature_error = 0.0;
    double dM = 0.0;
    double d2M = 0.0;
    std::size_t nodes = 0; ///< 0 when an exact identity was used
};

/// Radii r_min * q^i, uniform in ln r.
struct GeometricGrid {
    double r_min;
    double r_max;
    std::size_t count;

    GeometricGrid(double lo, double hi, std::size_t n) : r_min(lo), r_max(hi), count(n)
    {
        if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) throw domain_fault("grid needs 0 < r_min < r_max");
        if (n < 3) throw domain_fault("grid needs at least 3 points");
    }

    double log_step() const { return std::log(r_max / r_min) / double(count - 1); }

    std::vector<double> points() const
    {
        std::vector<double> r(count);
        const double l0 = std::log(r_min);
        const double step = log_step();
        for (std::size_t i = 0; i < count; ++i) r[i] = std::exp(l0 + double(i) * step);
        r.front() = r_min;
        r.back() = r_max;
        return r;
    }
};

struct ProfilePoint {
    double r;
    double x;
    double M;
    double dM;
    double d2M;
    double h;
    double phi;
    double dphi;
    double mean; ///< h / (2 pi phi), the normalized Gaussian mean
};

struct MeanProfile {
    double p;
    double alpha;
    double tolerance;
    double h_error = 0.0; ///< accumulated panel error estimate of h at the last point
    std::vector<ProfilePoint> points;
};

namespace detail {

struct CircleSample {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// |f|^p and its first two x-derivatives at z = sqrt(x) e^{i theta}, by the
// chain rule on w = |f|^2.
inline CircleSample circle_integrand(const EntireFunction& f, double p, double rho, double x, double theta,
                                     bool derivatives)
{
    const complex z = std::polar(rho, theta);
    const ComplexJet j = f.jet(z);
    const double w = std::norm(j.f);
    const double q = 0.5 * p;
    if (!derivatives) return {w == 0.0 ? 0.0 : std::pow(w, q), 0.0, 0.0};

    const complex F1 = j.df * z / (2.0 * x);
    const complex F2 = (j.d2f * z * z - j.df * z) / (4.0 * x * x);
    const double w1 = 2.0 * std::real(std::conj(j.f) * F1);
    const double w2 = 2.0 * std::norm(F1) + 2.0 * std::real(std::conj(j.f) * F2);
    if (q == 1.0) return {w, w1, w2};
    if (w == 0.0) return {0.0, 0.0, 0.0};
    const double g = std::pow(w, q);
    const double r1 = w1 / w;
    return {g, q * g * r1, q * (q - 1.0) * g * r1 * r1 + q * g * w2 / w};
}

struct CircleEstimate {
    CircleSample sum;
    double error = 0.0;
    std::size_t nodes = 0;
    bool converged = false;
};

inline bool circle_converged(const CircleSample& a, const CircleSample& b, double x, double tol, bool derivatives)
{
    const double sv = std::abs(a.v);
    if (std::abs(a.v - b.v) > tol * sv) return false;
    if (!derivatives) return true;
    return std::abs(a.d1 - b.d1) <= tol * std::max(std::abs(a.d1), sv / x) &&
           std::abs(a.d2 - b.d2) <= tol * std::max(std::abs(a.d2), sv / (x * x));
}

inline constexpr std::size_t trapezoid_start = 64;
inline constexpr std::size_t trapezoid_cap = std::size_t{1} << 16;

// Periodic trapezoidal rule with node doubling; odd nodes are added each level.
inline CircleEstimate circle_trapezoid(const EntireFunction& f, double p, double x, double tol, bool derivatives)
{
    const double rho = std::sqrt(x);
    CircleSample running;
    const auto add = [&](double theta) {
        const CircleSample s = circle_integrand(f, p, rho, x, theta, derivatives);
        running.v += s.v;
        running.d1 += s.d1;
        running.d2 += s.d2;
    };
    std::size_t n = trapezoid_start;
    for (std::size_t j = 0; j < n; ++j) add(two_pi * double(j) / double(n));
    const auto scaled = [&](std::size_t nodes) {
        const double h = two_pi / double(nodes);
        return CircleSample{running.v * h, running.d1 * h, running.d2 * h};
    };
    CircleSample previous = scaled(n);
    while (n < trapezoid_cap) {
        for (std::size_t j = 0; j < n; ++j) add(two_pi * (2.0 * double(j) + 1.0) / double(2 * n));
        n *= 2;
        const CircleSample current = scaled(n);
        const bool ok = circle_converged(current, previous, x, tol, derivatives);
        const double err = std::abs(current.v - previous.v);
        previous = current;
        if (ok) return {current, err, n, true};
    }
    return {previous, 0.0, n, false};
}

// Angles of zeros of f on (or next to) the circle |z| = rho: local minima of
// |f| on a scan, polished by Newton's method on f.
inline std::vector<double> near_zero_angles(const EntireFunction& f, double rho)
{
    constexpr std::size_t scan = 4096;
    std::vector<double> mag(scan);
    double peak = 0.0;
    for (std::size_t j = 0; j < scan; ++j) {
        mag[j] = std::abs(f(std::polar(rho, two_pi * double(j) / double(scan))));
        peak = std::max(peak, mag[j]);
    }
    std::vector<double> angles;
    for (std::size_t j = 0; j < scan; ++j) {
        const double prev = mag[(j + scan - 1) % scan];
        const double next = mag[(j + 1) % scan];
        if (!(mag[j] <= prev && mag[j] < next && mag[j] < 1e-2 * peak)) continue;
        double theta = two_pi * double(j) / double(scan);
        complex z = std::polar(rho, theta);
        for (int it = 0; it < 60; ++it) {
            const ComplexJet jt = f.jet(z);
            if (jt.df == complex{}) break;
            const complex step = jt.f / jt.df;
            z -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        const double candidate = std::arg(z);
        if (std::isfinite(candidate) && std::abs(std::abs(z) - rho) < 1e-2 * std::max(rho, 1.0) &&
            std::abs(std::remainder(candidate - theta, two_pi)) < 4.0 * two_pi / double(scan)) {
            theta = candidate;
        }
        theta = std::fmod(theta + two_pi, two_pi);
        angles.push_back(theta);
    }
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 angles.end());
    return angles;
}

template <int Order>
CircleSample circle_graded(const EntireFunction& f, double p, double x, std::span<const double> angles, int levels,
                           bool derivatives, std::size_t& nodes)
{
    const double rho = std::sqrt(x);
    CircleSample total;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double a = angles[i];
        const double b = i + 1 < angles.size() ? angles[i + 1] : angles.front() + two_pi;
        quadrature::graded_nodes<Order>(a, b, levels, [&](double theta, double w) {
            const CircleSample s = circle_integrand(f, p, rho, x, theta, derivatives);
            total.v += w * s.v;
            total.d1 += w * s.d1;
            total.d2 += w * s.d2;
            ++nodes;
        });
    }
    return total;
}

// Retry for integrands with zeros of f on the circle: composite Gauss-Legendre
// on arcs between the zeros, graded toward each zero.
inline CircleEstimate circle_singular(const EntireFunction& f, double p, double x, double tol, bool derivatives)
{
    const std::vector<double> angles = near_zero_angles(f, std::sqrt(x));
    if (angles.empty()) return {};
    std::size_t nodes = 0;
    const CircleSample coarse = circle_graded<20>(f, p, x, angles, 30, derivatives, nodes);
    const CircleSample fine = circle_graded<30>(f, p, x, angles, 45, derivatives, nodes);
    return {fine, std::abs(fine.v - coarse.v), nodes, circle_converged(fine, coarse, x, tol, derivatives)};
}

inline void check_circle_args(double p, double x, double tol)
{
    if (!(p > 0.0)) throw domain_fault("circle_mean: p must be positive");
    if (!(x > 0.0) || !std::isfinite(x)) throw domain_fault("circle_mean: x must be positive");
    if (!(tol > 0.0 && tol <= 1e-2)) throw domain_fault("circle_mean: tolerance must lie in (0, 1e-2]");
}

// Exact identities: |c z^k|^p is constant on circles, and for p = 2 the
// coefficient variants satisfy M(x) = 2 pi sum |c_j|^2 x^j.
inline bool circle_exact(const EntireFunction& f, double p, double x, CircleMean& out)
{
    if (const auto* m = std::get_if<Monomial>(&f.variant())) {
        const double a = 0.5 * p * double(m->degree);
        const double v = two_pi * std::pow(std::abs(m->coefficient), p) * std::pow(x, a);
        out = {x, v, 0.0, v * a / x, v * a * (a - 1.0) / (x * x), 0};
        return true;
    }
    const auto c = f.coefficients();
    if (!c || p != 2.0) return false;
    double v = 0.0, d1 = 0.0, d2 = 0.0;
    for (std::size_t j = c->size(); j-- > 0;) {
        const double a = std::norm((*c)[j]);
        const double jd = double(j);
        d2 = d2 * x + a * jd * (jd - 1.0) * (j >= 2 ? 1.0 : 0.0);
        d1 = d1 * x + a * jd;
        v = v * x + a;
    }
    // Horner above accumulates sum a_j j(j-1) x^j and sum a_j j x^j.
    out = {x, two_pi * v, 0.0, two_pi * d1 / x, two_pi * d2 / (x * x), 0};
    return true;
}

} // namespace detail

/// M(x), M'(x), M''(x) for the given power p.
inline CircleMean circle_mean(const EntireFunction& f, double p, double x, double tolerance = 1e-10)
{
    detail::check_circle_args(p, x, tolerance);
    CircleMean out;
    if (detail::circle_exact(f, p, x, out)) return out;

    auto est = detail::circle_trapezoid(f, p, x, tolerance, true);
    if (!est.converged) est = detail::circle_singular(f, p, x, tolerance, true);
    if (!est.converged) {
        throw convergence_failure("circle_mean: no convergence at x = " + std::to_string(x) +
                                  " (zero of f on the circle with non-even p?)");
    }
    return {x, est.sum.v, est.error, est.sum.d1, est.sum.d2, est.nodes};
}

/// M(x) alone; cheaper than circle_mean when no derivatives are needed.
inline double circle_mean_value(const EntireFunction& f, double p, double x, double tolerance = 1e-10)
{
    detail::check_circle_args(p, x, tolerance);
    CircleMean out;
    if (detail::circle_exact(f, p, x, out)) return out.value;
    auto est = detail::circle_trapezoid(f, p, x, tolerance, false);
    if (!est.converged) est = detail::circle_singular(f, p, x, tolerance, false);
    if (!est.converged) throw convergence_failure("circle_mean: no convergence at x = " + std::to_string(x));
    return est.sum.v;
}

/// int_a^b M(t) e^{-alpha t} dt by adaptive Gauss-Kronrod panels.
inline quadrature::Estimate weighted_accumulation(const EntireFunction& f, const MeanParams& params, double a,
                                                  double b, double tolerance = 1e-10)
{
    if (!(a >= 0.0) || !(b >= a)) throw domain_fault("weighted_accumulation: need 0 <= a <= b");
    auto integrand = [&](double t) {
        return circle_mean_value(f, params.p, t, tolerance) * std::exp(-params.alpha * t);
    };
    auto est = quadrature::adaptive(integrand, a, b, tolerance);
    if (est.depth_limited) {
        throw convergence_failure("weighted_accumulation: panel refinement exhausted on [" + std::to_string(a) +
                                  ", " + std::to_string(b) + "]");
    }
    return est;
}

/// h(x) = int_0^x M(t) e^{-alpha t} dt
inline double h_at(const EntireFunction& f, const MeanParams& params, double x, double tolerance = 1e-10)
{
    if (!(x > 0.0)) throw domain_fault("h_at: x must be positive");
    return weighted_accumulation(f, params, 0.0, x, tolerance).value;
}

/// Sampled Gaussian mean over a strictly increasing radius grid. Interval
/// integrals between consecutive x = r^2 are computed independently and
/// accumulated in grid order.
inline MeanProfile radial_mean_profile(const EntireFunction& f, const MeanParams& params,
                                       std::span<const double> r_grid, double tolerance = 1e-10)
{
    if (r_grid.size() < 3) throw domain_fault("radial_mean_profile: grid needs at least 3 points");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0) || !std::isfinite(r_grid[i])) throw domain_fault("radial_mean_profile: radii must be positive");
        if (i > 0 && !(r_grid[i] > r_grid[i - 1])) throw domain_fault("radial_mean_profile: grid is not strictly increasing");
    }
    const std::size_t n = r_grid.size();
    std::vector<quadrature::Estimate> pieces(n);
    std::vector<CircleMean> jets(n);
    parallel_for(n, [&](std::size_t i) {
        const double lo = i == 0 ? 0.0 : r_grid[i - 1] * r_grid[i - 1];
        const double hi = r_grid[i] * r_grid[i];
        pieces[i] = weighted_accumulation(f, params, lo, hi, tolerance);
        jets[i] = circle_mean(f, params.p, hi, tolerance);
    });

    MeanProfile out{params.p, params.alpha, tolerance, 0.0, {}};
    out.points.reserve(n);
    double h = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        h += pieces[i].value;
        err += pieces[i].error;
        const double x = r_grid[i] * r_grid[i];
        const auto [ph, dph] = phi(params.alpha, x);
        const auto& c = jets[i];
        out.points.push_back({r_grid[i], x, c.value, c.dM, c.d2M, h, ph, dph, h / (two_pi * ph)});
    }
    out.h_error = err;
    return out;
}

inline MeanProfile radial_mean_profile(const EntireFunction& f, const MeanParams& params, const GeometricGrid& grid,
                                       double tolerance = 1e-10)
{
    const auto r = grid.points();
    return radial_mean_profile(f, params, std::span<const double>(r), tolerance);
}

/// Gaussian mean of z^k in closed form:
///   int_0^{r^2} t^{kp/2} e^{-alpha t} dt / int_0^{r^2} e^{-alpha t} dt.
inline double monomial_mean_closed_form(unsigned k, double p, double alpha, double r)
{
    if (!(r > 0.0)) throw domain_fault("monomial_mean_closed_form: r must be positive");
    if (!(p > 0.0)) throw domain_fault("monomial_mean_closed_form: p must be positive");
    const double a = 0.5 * p * double(k);
    const double X = r * r;
    if (alpha == 0.0) return std::pow(X, a) / (a + 1.0);
    if (alpha > 0.0) {
        const double z = alpha * X;
        const double num = lower_incomplete_gamma(a + 1.0, z);
        const double den = lower_incomplete_gamma(1.0, z);
        return std::exp(std::log(num) - a * std::log(alpha) - std::log(den));
    }
    // alpha < 0: positive series X^{a+1} sum_n (bX)^n / (n! (a + n + 1)), b = -alpha.
    const double bx = -alpha * X;
    if (bx > 700.0) throw saturation("monomial_mean_closed_form: exp(-alpha r^2) overflows");
    double term = 1.0;
    double sum = term / (a + 1.0);
    for (int n = 1; n < 100000; ++n) {
        term *= bx / double(n);
        const double add = term / (a + 1.0 + double(n));
        sum += add;
        if (add < sum * 1e-17) break;
    }
    // phi(X) = expm1(bX)/b, so X*sum/phi = bX*sum/expm1(bX).
    return std::pow(X, a) * (bx * sum / std::expm1(bx));
}

} // namespace gmeans
