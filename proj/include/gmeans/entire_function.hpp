#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace gmeans {

using complex = std::complex<double>;

/// c z^k
struct Monomial {
    unsigned degree = 0;
    complex coefficient{1.0, 0.0};
};

/// sum_j c_j z^j, constant term first.
struct Polynomial {
    std::vector<complex> coefficients;
};

/// Truncated Taylor series with a declared bound on the neglected tail.
struct TruncatedTaylor {
    std::vector<complex> coefficients;
    double tail_bound = 0.0;
};

/// c exp(beta z)
struct Exponential {
    complex beta{1.0, 0.0};
    complex coefficient{1.0, 0.0};
};

/// Value and first two complex derivatives at a point.
struct ComplexJet {
    complex f;
    complex df;
    complex d2f;
};

/// z^n by repeated squaring; exact at z = 0.
inline complex ipow(complex z, unsigned n)
{
    complex r{1.0, 0.0};
    while (n) {
        if (n & 1u) r *= z;
        z *= z;
        n >>= 1u;
    }
    return r;
}

/// Immutable entire function. Safe to share across threads.
class EntireFunction {
public:
    using Variant = std::variant<Monomial, Polynomial, TruncatedTaylor, Exponential>;

    static EntireFunction monomial(unsigned k, complex c = 1.0)
    {
        if (c == complex{}) throw domain_fault("monomial coefficient must be nonzero");
        return EntireFunction(Monomial{k, c});
    }

    static EntireFunction polynomial(std::vector<complex> coefficients)
    {
        require_nonzero(coefficients, "polynomial");
        return EntireFunction(Polynomial{std::move(coefficients)});
    }

    static EntireFunction taylor(std::vector<complex> coefficients, double tail_bound)
    {
        require_nonzero(coefficients, "taylor");
        if (!(tail_bound >= 0.0)) throw domain_fault("taylor tail bound must be nonnegative");
        return EntireFunction(TruncatedTaylor{std::move(coefficients), tail_bound});
    }

    static EntireFunction exponential(complex beta, complex c = 1.0)
    {
        if (c == complex{}) throw domain_fault("exponential coefficient must be nonzero");
        return EntireFunction(Exponential{beta, c});
    }

    const Variant& variant() const noexcept { return v_; }

    bool is_monomial() const noexcept { return std::holds_alternative<Monomial>(v_); }

    /// Coefficient list for polynomial and truncated Taylor variants.
    std::optional<std::span<const complex>> coefficients() const noexcept
    {
        if (const auto* p = std::get_if<Polynomial>(&v_)) return std::span<const complex>(p->coefficients);
        if (const auto* t = std::get_if<TruncatedTaylor>(&v_)) return std::span<const complex>(t->coefficients);
        return std::nullopt;
    }

    complex operator()(complex z) const { return jet(z).f; }

    ComplexJet jet(complex z) const
    {
        return std::visit([z](const auto& g) { return evaluate(g, z); }, v_);
    }

    /// c * f
    EntireFunction scaled(complex c) const
    {
        if (c == complex{}) throw domain_fault("scale factor must be nonzero");
        return std::visit(
            [c](auto g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, Monomial> || std::is_same_v<T, Exponential>) {
                    g.coefficient *= c;
                } else {
                    for (auto& a : g.coefficients) a *= c;
                }
                return EntireFunction(std::move(g));
            },
            v_);
    }

    /// z -> f(e^{i theta} z)
    EntireFunction rotated(double theta) const
    {
        const complex w = std::polar(1.0, theta);
        return std::visit(
            [w](auto g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, Monomial>) {
                    g.coefficient *= ipow(w, g.degree);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    g.beta *= w;
                } else {
                    complex wj = 1.0;
                    for (auto& a : g.coefficients) {
                        a *= wj;
                        wj *= w;
                    }
                }
                return EntireFunction(std::move(g));
            },
            v_);
    }

private:
    explicit EntireFunction(Variant v) : v_(std::move(v)) {}

    static void require_nonzero(const std::vector<complex>& c, const char* what)
    {
        for (const auto& a : c)
            if (a != complex{}) return;
        throw domain_fault(std::string(what) + " needs at least one nonzero coefficient");
    }

    static ComplexJet evaluate(const Monomial& m, complex z)
    {
        const unsigned k = m.degree;
        const complex c = m.coefficient;
        if (k == 0) return {c, 0.0, 0.0};
        const complex zk2 = k >= 2 ? ipow(z, k - 2) : complex{};
        const complex zk1 = ipow(z, k - 1);
        return {c * zk1 * z, c * double(k) * zk1, c * double(k) * double(k - 1) * zk2};
    }

    // Horner with simultaneous first and second derivative.
    static ComplexJet horner(std::span<const complex> a, complex z)
    {
        complex f{}, df{}, d2f{};
        for (std::size_t i = a.size(); i-- > 0;) {
            d2f = d2f * z + 2.0 * df;
            df = df * z + f;
            f = f * z + a[i];
        }
        return {f, df, d2f};
    }

    static ComplexJet evaluate(const Polynomial& p, complex z) { return horner(p.coefficients, z); }
    static ComplexJet evaluate(const TruncatedTaylor& t, complex z) { return horner(t.coefficients, z); }

    static ComplexJet evaluate(const Exponential& e, complex z)
    {
        const complex v = e.coefficient * std::exp(e.beta * z);
        return {v, e.beta * v, e.beta * e.beta * v};
    }

    Variant v_;
};

} // namespace gmeans
