#pragma once

#include <cmath>

namespace gmeans {

/// Tolerance set shared by the analysis, verification and report layers.
struct Tolerances {
    double quadrature = 1e-10;   ///< relative accuracy of circle means and h
    double sign = 1e-9;          ///< |v| <= sign * (1 + scale) counts as zero
    double identity = 1e-12;     ///< exact identities such as phi' = 1 - alpha*phi
    double discriminant = 1e-10; ///< B^2 - S^2 = 4AC and the discriminant square
    double quotient_rule = 1e-8; ///< D(h/phi) against D(h) - D(phi)
};

/// Zero test used by every sign check.
inline bool near_zero(double v, double scale, double tol) noexcept
{
    return std::abs(v) <= tol * (1.0 + std::abs(scale));
}

/// Relative agreement of two values measured against a caller-supplied magnitude.
inline bool agree(double a, double b, double scale, double tol) noexcept
{
    return std::abs(a - b) <= tol * std::abs(scale);
}

} // namespace gmeans
