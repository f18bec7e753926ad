#pragma once

// Scalar building blocks of the Gaussian weight: the radial primitive phi,
// the auxiliary functions g1, g2, g3, the quadratic coefficients A, B, C and
// the discriminant root S, plus the universal constant t0.
//
// Everything derived from phi reads the value returned by phi() so that
// phi' = 1 - alpha*phi holds as an internal identity.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace gmeans {

/// Exponent of the weight exp(-alpha |z|^2).
struct GaussianWeight {
    double alpha = 0.0;

    explicit GaussianWeight(double a) : alpha(a)
    {
        if (!std::isfinite(a)) throw domain_fault("alpha must be finite");
    }
};

/// Squared radius x = r^2.
struct RadialPoint {
    double x = 0.0;

    explicit RadialPoint(double v) : x(v)
    {
        if (!(v >= 0.0) || !std::isfinite(v)) throw domain_fault("x must be finite and nonnegative");
    }
};

struct PhiValue {
    double phi;  ///< (1 - exp(-alpha x)) / alpha
    double dphi; ///< exp(-alpha x)
};

struct GValues {
    double g1; ///< x(1 - alpha x) - phi
    double g2; ///< alpha phi^2 - 2(1 + alpha x) phi + 2x
    double g3; ///< x - (1 + alpha x) phi
};

/// Point evaluation of every auxiliary quantity at (alpha, x, y).
///
/// For alpha <= 0 positivity of S follows from g3 >= 0; for alpha > 0 it
/// follows instead from A < 0 and C > 0, so -4AC > 0 carries the bound.
struct AuxiliaryBundle {
    double alpha;
    double x;
    double y;
    double phi;
    double dphi;
    double g1;
    double g2;
    double g3;
    double A;
    double B;
    double C;
    double S;
};

struct RootResult {
    double value;
    double residual;
    int iterations;
};

inline constexpr double small_argument_cutoff = 1e-8;

/// phi(x) = (1 - exp(-alpha x))/alpha together with phi'(x) = exp(-alpha x).
inline PhiValue phi(double alpha, double x)
{
    if (!std::isfinite(alpha)) throw domain_fault("phi: alpha must be finite");
    if (!(x >= 0.0)) throw domain_fault("phi: x must be nonnegative");
    const double t = alpha * x;
    const double dphi = std::exp(-t);
    if (std::abs(t) < small_argument_cutoff) {
        // x (1 - t/2 + t^2/6 - t^3/24 + t^4/120)
        const double series = 1.0 - t / 2.0 * (1.0 - t / 3.0 * (1.0 - t / 4.0 * (1.0 - t / 5.0)));
        return {x * series, dphi};
    }
    return {-std::expm1(-t) / alpha, dphi};
}

inline GValues aux_g(double alpha, double x)
{
    const double f = phi(alpha, x).phi;
    return {
        x * (1.0 - alpha * x) - f,
        alpha * f * f - 2.0 * (1.0 + alpha * x) * f + 2.0 * x,
        x - (1.0 + alpha * x) * f,
    };
}

/// A = (phi - x)/phi^2, B = 1 - alpha x + y, C = x phi', S = sqrt(B^2 - 4AC).
inline AuxiliaryBundle aux_abcs(double alpha, double x, double y)
{
    if (!(x > 0.0)) throw domain_fault("aux_abcs: x must be positive");
    if (!(y >= 0.0)) throw domain_fault("aux_abcs: y must be nonnegative");
    const auto [f, df] = phi(alpha, x);
    const auto [g1, g2, g3] = aux_g(alpha, x);
    const double A = (f - x) / (f * f);
    const double B = (1.0 - alpha * x) + y;
    const double C = x * df;
    const double disc = B * B - 4.0 * A * C;
    const double scale = B * B + std::abs(4.0 * A * C);
    if (disc < -1e-12 * scale) {
        throw domain_fault("aux_abcs: negative discriminant B^2 - 4AC = " + std::to_string(disc));
    }
    const double S = std::sqrt(std::max(disc, 0.0));
    return {alpha, x, y, f, df, g1, g2, g3, A, B, C, S};
}

/// B - S, through 4AC/(B + S) when B >= 0 so neither form cancels.
inline double b_minus_s(const AuxiliaryBundle& b)
{
    return b.B >= 0.0 ? 4.0 * b.A * b.C / (b.B + b.S) : b.B - b.S;
}

/// The root (B - S)/(2A) of -A r^2 + B r - C, as 2C/(B + S) when B >= 0.
inline double lower_root(const AuxiliaryBundle& b)
{
    return b.B >= 0.0 ? 2.0 * b.C / (b.B + b.S) : (b.B - b.S) / (2.0 * b.A);
}

/// u(t) = e^t - 1 - t - t^2, whose positive root is t0.
inline double u_t0(double t) { return std::expm1(t) - t - t * t; }

/// Bracketed Newton for the positive root of u; bisects whenever the Newton
/// step leaves the current bracket.
inline RootResult solve_t0(double tolerance, double lo = 1.0, double hi = 3.0, int max_iterations = 200)
{
    if (!(tolerance > 0.0)) throw domain_fault("solve_t0: tolerance must be positive");
    if (!(lo > 0.0) || !(hi > lo)) throw domain_fault("solve_t0: invalid bracket");
    double ulo = u_t0(lo);
    double uhi = u_t0(hi);
    if (!(ulo < 0.0) || !(uhi > 0.0)) throw domain_fault("solve_t0: bracket does not straddle the root");

    double t = hi;
    double ut = uhi;
    for (int it = 1; it <= max_iterations; ++it) {
        const double du = std::exp(t) - 1.0 - 2.0 * t;
        double next = du > 0.0 ? t - ut / du : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
        ut = u_t0(t);
        if (std::abs(ut) <= tolerance) return {t, ut, it};
        if (ut < 0.0) lo = t; else hi = t;
        if (std::nextafter(lo, hi) >= hi) break;
    }
    throw convergence_failure("solve_t0: tolerance not reached; it is below the attainable precision");
}

/// t0 = 1.79..., solved once to near machine precision.
inline double t0()
{
    static const double value = solve_t0(1e-15).value;
    return value;
}

/// Unique positive root of g1 for alpha < 0.
inline double x0_of_alpha(double alpha)
{
    if (!(alpha < 0.0)) throw domain_fault("x0 is defined only for alpha < 0");
    return t0() / (-alpha);
}

/// Lower incomplete gamma function: power series below s + 1, continued
/// fraction for the complement above.
inline double lower_incomplete_gamma(double s, double z)
{
    if (!(s > 0.0) || !std::isfinite(s)) throw domain_fault("lower_incomplete_gamma: s must be positive");
    if (!(z >= 0.0)) throw domain_fault("lower_incomplete_gamma: z must be nonnegative");
    if (z == 0.0) return 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();

    if (z < s + 1.0) {
        double term = 1.0 / s;
        double sum = term;
        for (int n = 1; n < 100000; ++n) {
            term *= z / (s + n);
            sum += term;
            if (term < sum * eps * 0.25) break;
        }
        const double log_value = s * std::log(z) - z + std::log(sum);
        if (log_value > std::log(std::numeric_limits<double>::max())) {
            throw saturation("lower_incomplete_gamma: result overflows");
        }
        return std::exp(log_value);
    }

    const double gamma_s = std::tgamma(s);
    if (!std::isfinite(gamma_s)) throw saturation("lower_incomplete_gamma: Gamma(s) overflows");

    // Modified Lentz evaluation of the continued fraction for Gamma(s, z).
    constexpr double tiny = 1e-300;
    double b = z + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    const double upper = std::exp(s * std::log(z) - z) * h;
    return gamma_s - upper;
}

} // namespace gmeans
