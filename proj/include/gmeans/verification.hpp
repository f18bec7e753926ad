#pragma once

// Grid suites for the inequalities behind the convexity criteria. Each check
// carries a regime guard matching the hypothesis under which the inequality
// is claimed; failures record every operand so they can be reproduced.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convexity.hpp"
#include "entire_function.hpp"
#include "errors.hpp"
#include "integral_means.hpp"
#include "special_fn.hpp"
#include "tolerance.hpp"

namespace gmeans {

using NamedValues = std::vector<std::pair<std::string, double>>;

struct GridSpec {
    std::vector<double> alpha_values;
    double x_lo = 1e-3;
    double x_hi = 20.0;
    std::size_t count = 400;
    std::vector<double> y_values;

    void validate() const
    {
        if (!(x_lo > 0.0) || !(x_hi > x_lo)) throw domain_fault("grid spec needs 0 < x_lo < x_hi");
        if (count < 2) throw domain_fault("grid spec needs at least 2 points");
        for (double a : alpha_values)
            if (!std::isfinite(a)) throw domain_fault("grid spec alpha values must be finite");
        for (double y : y_values)
            if (!(y >= 0.0) || !std::isfinite(y)) throw domain_fault("grid spec y values must be finite and >= 0");
    }

    std::vector<double> x_points() const
    {
        validate();
        std::vector<double> x(count);
        const double l0 = std::log(x_lo);
        const double step = (std::log(x_hi) - l0) / double(count - 1);
        for (std::size_t i = 0; i < count; ++i) x[i] = std::exp(l0 + double(i) * step);
        x.front() = x_lo;
        x.back() = x_hi;
        return x;
    }
};

struct Failure {
    std::string check;
    NamedValues parameters;
    double lhs;
    double rhs;
    double slack;
    NamedValues operands;
};

enum class SuiteVerdict { pass, fail, hypotheses_not_met };

inline std::string_view to_string(SuiteVerdict v)
{
    switch (v) {
    case SuiteVerdict::pass: return "pass";
    case SuiteVerdict::fail: return "fail";
    case SuiteVerdict::hypotheses_not_met: return "hypotheses-not-met";
    }
    return "?";
}

struct SuiteReport {
    std::string suite;
    std::size_t checks_run = 0;
    std::vector<Failure> failures;
    Tolerances tolerances;
    bool hypotheses_met = true;
    NamedValues summary; ///< suite-specific computed quantities

    bool passed() const noexcept { return failures.empty(); }

    SuiteVerdict verdict() const noexcept
    {
        if (!failures.empty()) return SuiteVerdict::fail;
        return hypotheses_met ? SuiteVerdict::pass : SuiteVerdict::hypotheses_not_met;
    }

    double summary_value(std::string_view key) const
    {
        for (const auto& [k, v] : summary)
            if (k == key) return v;
        throw std::out_of_range("no summary entry '" + std::string(key) + "'");
    }
};

namespace detail {

// Records one inequality lhs >= rhs (or <=, or ~=) with a zero band.
class SuiteRecorder {
public:
    SuiteRecorder(std::string name, const Tolerances& tol) { rep_.suite = std::move(name), rep_.tolerances = tol; }

    using Operands = std::function<NamedValues()>;

    void at_least(const std::string& check, double lhs, double rhs, double band, const NamedValues& params,
                  const Operands& ops)
    {
        record(check, lhs, rhs, lhs - rhs, band, params, ops);
    }

    void at_most(const std::string& check, double lhs, double rhs, double band, const NamedValues& params,
                 const Operands& ops)
    {
        record(check, lhs, rhs, rhs - lhs, band, params, ops);
    }

    void close(const std::string& check, double lhs, double rhs, double band, const NamedValues& params,
               const Operands& ops)
    {
        record(check, lhs, rhs, band - std::abs(lhs - rhs), 0.0, params, ops);
    }

    void strictly_positive(const std::string& check, double v, const NamedValues& params, const Operands& ops)
    {
        ++rep_.checks_run;
        if (!(v > 0.0)) rep_.failures.push_back({check, params, v, 0.0, v, ops()});
    }

    SuiteReport& report() { return rep_; }

private:
    void record(const std::string& check, double lhs, double rhs, double slack, double band, const NamedValues& params,
                const Operands& ops)
    {
        ++rep_.checks_run;
        if (!(slack >= -band)) rep_.failures.push_back({check, params, lhs, rhs, slack, ops()});
    }

    SuiteReport rep_;
};

inline double sign_band(double scale, const Tolerances& tol) { return tol.sign * (1.0 + std::abs(scale)); }

inline NamedValues bundle_operands(const AuxiliaryBundle& b)
{
    return {{"alpha", b.alpha}, {"x", b.x}, {"y", b.y}, {"phi", b.phi}, {"dphi", b.dphi}, {"g1", b.g1},
            {"g2", b.g2},       {"g3", b.g3}, {"A", b.A}, {"B", b.B},     {"C", b.C},       {"S", b.S}};
}

} // namespace detail

/// phi' = 1 - alpha phi, sign of phi - x, g1 <= 0 (alpha >= 0), g2 <= 0,
/// sign of g3, over every (alpha, x) of the grid.
inline SuiteReport verify_lemma4(const GridSpec& grid, const Tolerances& tol = {})
{
    const auto xs = grid.x_points();
    detail::SuiteRecorder rec("lemma4", tol);
    for (double alpha : grid.alpha_values) {
        for (double x : xs) {
            const auto [f, df] = phi(alpha, x);
            const auto [g1, g2, g3] = aux_g(alpha, x);
            const NamedValues params{{"alpha", alpha}, {"x", x}};
            const auto ops = [&] {
                return NamedValues{{"alpha", alpha}, {"x", x}, {"phi", f}, {"dphi", df}, {"g1", g1}, {"g2", g2}, {"g3", g3}};
            };
            // Relative to the largest operand: for large alpha x both sides of
            // 1 - alpha phi cancel to far below machine precision of 1.
            const double id_scale = std::max({std::abs(df), 1.0, std::abs(alpha * f)});
            rec.close("dphi=1-alpha*phi", df, 1.0 - alpha * f, tol.identity * id_scale, params, ops);

            const double bx = detail::sign_band(x + f, tol);
            if (alpha <= 0.0) rec.at_least("phi-x>=0", f - x, 0.0, bx, params, ops);
            if (alpha >= 0.0) rec.at_most("phi-x<=0", f - x, 0.0, bx, params, ops);

            if (alpha >= 0.0) {
                rec.at_most("g1<=0", g1, 0.0, detail::sign_band(x + std::abs(alpha) * x * x + f, tol), params, ops);
            }
            const double s2 = std::abs(alpha) * f * f + 2.0 * std::abs(1.0 + alpha * x) * f + 2.0 * x;
            rec.at_most("g2<=0", g2, 0.0, detail::sign_band(s2, tol), params, ops);

            const double s3 = detail::sign_band(x + std::abs(1.0 + alpha * x) * f, tol);
            if (alpha <= 0.0) rec.at_least("g3>=0", g3, 0.0, s3, params, ops);
            if (alpha >= 0.0) rec.at_most("g3<=0", g3, 0.0, s3, params, ops);
        }
    }
    return std::move(rec.report());
}

/// S > 0, the discriminant identity, the lower bound on S^2 (alpha <= 0),
/// sign agreement of both forms of Delta, the right half of the bracket
/// h/M <= (B + S)/(2A) (alpha < 0) and the quotient rule for D.
inline SuiteReport verify_lemma5(const EntireFunction& f, const MeanParams& params, const GridSpec& grid,
                                 const Tolerances& tol = {})
{
    const auto xs = grid.x_points();
    std::vector<double> rs(xs.size());
    std::transform(xs.begin(), xs.end(), rs.begin(), [](double x) { return std::sqrt(x); });
    const MeanProfile prof = radial_mean_profile(f, params, std::span<const double>(rs), tol.quadrature);
    const double alpha = params.alpha;

    detail::SuiteRecorder rec("lemma5", tol);
    // Hypotheses: M > 0 and M' >= 0 on the grid.
    for (const auto& pt : prof.points) {
        ++rec.report().checks_run;
        if (!(pt.M > 0.0) || pt.dM * pt.x < -detail::sign_band(pt.M, tol)) {
            rec.report().hypotheses_met = false;
            rec.report().summary.push_back({"hypothesis_violation_x", pt.x});
            return std::move(rec.report());
        }
    }

    double worst_quotient = 0.0;
    for (const auto& pt : prof.points) {
        const double x = pt.x;
        const CircleMean m{x, pt.M, 0.0, std::max(0.0, pt.dM), pt.d2M, 0};
        const DeltaPair dp = delta_from_values(alpha, m, pt.h, tol);
        const AuxiliaryBundle& b = dp.aux;
        const NamedValues where{{"alpha", alpha}, {"p", params.p}, {"x", x}};
        const auto ops = [&] {
            auto v = detail::bundle_operands(b);
            v.insert(v.end(), {{"h", pt.h}, {"M", pt.M}, {"dM", pt.dM}, {"d2M", pt.d2M}, {"delta_direct", dp.direct},
                               {"delta_quadratic", dp.quadratic}});
            return v;
        };

        rec.strictly_positive("S>0", b.S, where, ops);
        rec.close("S^2=B^2-4AC", b.S * b.S, b.B * b.B - 4.0 * b.A * b.C,
                  tol.discriminant * (b.B * b.B + std::abs(4.0 * b.A * b.C)), where, ops);

        const double base = (1.0 - alpha * x) * (1.0 - alpha * x);
        const double cross = 4.0 * x * b.dphi * (b.phi - x) / (b.phi * b.phi);
        const double square = (2.0 * x - (1.0 + alpha * x) * b.phi) / b.phi;
        rec.close("discriminant_identity", base - cross, square * square,
                  tol.discriminant * std::max({base, std::abs(cross), square * square}), where, ops);
        if (alpha <= 0.0) {
            rec.at_least("S^2>=((2x-(1+ax)phi)/phi)^2", b.S * b.S, square * square,
                         detail::sign_band(b.S * b.S, tol), where, ops);
        }

        ++rec.report().checks_run;
        if (!near_zero(dp.quadratic, dp.quadratic_scale, tol.sign) && (dp.direct > 0.0) != (dp.quadratic > 0.0)) {
            rec.report().failures.push_back({"sign(Delta)=sign(quadratic)", where, dp.direct, dp.quadratic,
                                             -std::abs(dp.direct - dp.quadratic), ops()});
        }

        if (alpha < 0.0) {
            const double upper = (b.B + b.S) / (2.0 * b.A);
            rec.at_most("bracket:h/M<=(B+S)/(2A)", dp.ratio, upper, detail::sign_band(upper, tol), where, ops);
        }

        const FunctionJet hj = h_jet(pt.h, m, alpha);
        const FunctionJet pj = phi_jet(alpha, x);
        const double via_quotient = d_operator(quotient_jet(hj, pj), x);
        const double scale = d_operator_scale(hj, x) + d_operator_scale(pj, x);
        const double gap = std::abs(via_quotient - (dp.d_h - dp.d_phi)) / scale;
        worst_quotient = std::max(worst_quotient, gap);
        rec.close("quotient_rule:D(h/phi)=D(h)-D(phi)", via_quotient, dp.d_h - dp.d_phi, tol.quotient_rule * scale, where, ops);
    }
    rec.report().summary.push_back({"worst_quotient_rule_gap", worst_quotient});
    return std::move(rec.report());
}

struct DChainOptions {
    std::size_t y_points = 100000;
    double y_max = 0.0; ///< 0 selects max(10, 4 y*)
};

/// d2(y) = (y - xA'/A)(B - S) + 2 x A' phi.
inline double d2_of_y(double alpha, double x, double y)
{
    const AuxiliaryBundle b = aux_abcs(alpha, x, y);
    const double xA = x * b.g2 / (b.phi * b.phi * b.phi);
    return (y - xA / b.A) * b_minus_s(b) + 2.0 * xA * b.phi;
}

/// Location of the minimum of d2 over y, alpha < 0, x > x0.
inline double y_star(double alpha, double x)
{
    const double f = phi(alpha, x).phi;
    const double ax = alpha * x;
    const double outer = f - x * (1.0 - ax);
    const double num = -(1.0 + 2.0 * ax) * f * f + x * (5.0 + 3.0 * ax) * f - 4.0 * x * x;
    const double den = f * f - x * (3.0 + ax) * f + 2.0 * x * x;
    return outer * num / (2.0 * (f - x) * den);
}

/// Closed-form minimum -1/2 (1 + alpha x^2/(phi - x))^2.
inline double d2_min_closed_form(double alpha, double x)
{
    const double f = phi(alpha, x).phi;
    const double t = 1.0 + alpha * x * x / (f - x);
    return -0.5 * t * t;
}

/// Grid minimization of d2 over y against the closed-form minimizer and
/// minimum, plus the two bracket positivity facts.
inline SuiteReport verify_d_chain(double alpha, double x, const DChainOptions& opts = {}, const Tolerances& tol = {})
{
    if (!(alpha < 0.0)) throw domain_fault("verify_d_chain: alpha must be negative");
    const double x0 = x0_of_alpha(alpha);
    if (!(x > x0)) throw domain_fault("verify_d_chain: x must exceed x0 = " + std::to_string(x0));
    if (opts.y_points < 3) throw domain_fault("verify_d_chain: need at least 3 y points");

    const double f = phi(alpha, x).phi;
    const double ystar = y_star(alpha, x);
    const double closed = d2_min_closed_form(alpha, x);
    const double y_max = opts.y_max > 0.0 ? opts.y_max : std::max(10.0, 4.0 * ystar);
    const double step = y_max / double(opts.y_points - 1);

    std::size_t best = 0;
    double best_value = d2_of_y(alpha, x, 0.0);
    for (std::size_t i = 1; i < opts.y_points; ++i) {
        const double v = d2_of_y(alpha, x, step * double(i));
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    const double y_grid = step * double(best);

    // Golden-section refinement over the neighbouring grid cells.
    const double refined_step = 1e-2 * step;
    double lo = std::max(0.0, y_grid - step);
    double hi = std::min(y_max, y_grid + step);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - ratio * (hi - lo);
    double d = lo + ratio * (hi - lo);
    double fc = d2_of_y(alpha, x, c);
    double fd = d2_of_y(alpha, x, d);
    while (hi - lo > refined_step) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = d2_of_y(alpha, x, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = d2_of_y(alpha, x, d);
        }
    }
    const double y_refined = 0.5 * (lo + hi);
    const double d2_min = std::min({best_value, d2_of_y(alpha, x, y_refined)});

    detail::SuiteRecorder rec("dchain", tol);
    const NamedValues where{{"alpha", alpha}, {"x", x}};
    const auto ops = [&] {
        return NamedValues{{"phi", f}, {"y_star", ystar}, {"y_grid", y_grid}, {"y_refined", y_refined},
                           {"d2_min", d2_min}, {"d2_closed", closed}, {"step", step}};
    };
    rec.close("grid argmin ~ y*", y_grid, ystar, step, where, ops);
    rec.close("refined argmin ~ y*", y_refined, ystar, refined_step, where, ops);
    rec.close("min d2 = closed form", d2_min, closed, 1e-6 * std::abs(closed), where, ops);

    const double ax = alpha * x;
    const double g3 = aux_g(alpha, x).g3;
    const double fact1 = f * f - x * (3.0 + ax) * f + 2.0 * x * x;
    const double fact2 = -(1.0 + 2.0 * ax) * f * f + x * (5.0 + 3.0 * ax) * f - 4.0 * x * x;
    rec.at_least("phi^2-x(3+ax)phi+2x^2>=0", fact1, 0.0, detail::sign_band(f * f, tol), where, ops);
    rec.at_least("-(1+2ax)phi^2+x(5+3ax)phi-4x^2>=0", fact2, 0.0, detail::sign_band(f * f, tol), where, ops);
    rec.close("phi^2-x(3+ax)phi+2x^2=(phi-x)^2+x*g3", fact1, (f - x) * (f - x) + x * g3,
              tol.discriminant * (f * f + x * std::abs(3.0 + ax) * f + 2.0 * x * x), where, ops);

    rec.report().summary = {{"y_star", ystar}, {"y_grid", y_grid},   {"y_refined", y_refined},
                            {"d2_min", d2_min}, {"d2_closed", closed}, {"step", step},
                            {"refined_step", refined_step}};
    return std::move(rec.report());
}

enum class DeltaForm { stable, unstable };

/// delta = h - M (B - S)/(2A). The stable form picks 2C/(B + S) or the
/// literal quotient by the sign of B; the unstable one always takes the
/// literal quotient, which cancels as x -> 0 and is refused there.
inline double delta_value(const AuxiliaryBundle& b, double M, double h, DeltaForm form = DeltaForm::stable)
{
    if (form == DeltaForm::stable) return h - M * lower_root(b);
    if (b.x < 1e-4) throw domain_fault("delta_value: unstable form cancels below x = 1e-4");
    if (b.A == 0.0) throw domain_fault("delta_value: unstable form undefined for A = 0");
    return h - M * (b.B - b.S) / (2.0 * b.A);
}

/// delta(x) along probes decreasing to 0: |delta| shrinks, and its sign
/// matches the regime (>= 0 for alpha < 0 below x0 with log-convex M,
/// <= 0 for alpha >= 0 with log-concave M).
inline SuiteReport verify_delta_boundary(const EntireFunction& f, const MeanParams& params,
                                         std::span<const double> probes, const Tolerances& tol = {})
{
    if (probes.empty()) throw domain_fault("verify_delta_boundary: no probes");
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (!(probes[i] > 0.0 && probes[i] <= 1.0)) throw domain_fault("verify_delta_boundary: probes must lie in (0, 1]");
        if (i > 0 && !(probes[i] < probes[i - 1])) throw domain_fault("verify_delta_boundary: probes must decrease");
    }
    const double alpha = params.alpha;
    detail::SuiteRecorder rec("delta", tol);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double x = probes[i];
        const CircleMean m = circle_mean(f, params.p, x, tol.quadrature);
        const double h = h_at(f, params, x, tol.quadrature);
        const AuxiliaryBundle b = aux_abcs(alpha, x, std::max(0.0, x * m.dM / m.value));
        const double subtracted = m.value * lower_root(b);
        const double delta = h - subtracted;
        const double band = detail::sign_band(std::abs(h) + std::abs(subtracted), tol);
        const double dM = d_operator({m.value, m.dM, m.d2M}, x);
        const double dM_band = detail::sign_band(d_operator_scale({m.value, m.dM, m.d2M}, x), tol);
        const NamedValues where{{"alpha", alpha}, {"p", params.p}, {"x", x}};
        const auto ops = [&] {
            auto v = detail::bundle_operands(b);
            v.insert(v.end(), {{"h", h}, {"M", m.value}, {"dM", m.dM}, {"d2M", m.d2M}, {"delta", delta}, {"D(M)", dM}});
            return v;
        };

        if (i > 0) rec.at_most("|delta| decreasing", std::abs(delta), previous, band, where, ops);
        previous = std::abs(delta);

        if (alpha < 0.0 && x < x0_of_alpha(alpha) && dM >= -dM_band) {
            rec.at_least("delta>=0 (alpha<0)", delta, 0.0, band, where, ops);
        } else if (alpha >= 0.0 && dM <= dM_band) {
            rec.at_most("delta<=0 (alpha>=0)", delta, 0.0, band, where, ops);
        }
        if (x >= 0.1 && b.A != 0.0) {
            const double unstable = delta_value(b, m.value, h, DeltaForm::unstable);
            rec.close("stable=unstable form", delta, unstable, 1e-8 * std::max(std::abs(h), std::abs(subtracted)), where, ops);
        }
        const std::string k = std::to_string(i);
        rec.report().summary.push_back({"x_" + k, x});
        rec.report().summary.push_back({"delta_" + k, delta});
        rec.report().summary.push_back({"M*phi_" + k, m.value * b.phi});
    }
    return std::move(rec.report());
}

/// Bounds on the coefficient alpha/(phi A') and on d3 over an (alpha, x, y)
/// grid: alpha/(phi A') >= 1 for alpha < 0; for alpha > 0 it is <= 0,
/// d3 <= (2x/phi - 1 - alpha x) - S and d3 <= 0.
/// S^2 - (2x/phi - 1 - alpha x)^2 = y (2(1 - alpha x) + y), so the bound
/// S >= |2x/phi - 1 - alpha x| is only asserted where that factor is >= 0.
/// Outside it (alpha x > 1, small y) S falls below the lead term and the
/// y-coefficient alone keeps d3 <= 0.
inline SuiteReport verify_d3_bounds(const GridSpec& grid, const Tolerances& tol = {})
{
    const auto xs = grid.x_points();
    detail::SuiteRecorder rec("d3", tol);
    for (double alpha : grid.alpha_values) {
        if (alpha == 0.0) continue;
        for (double x : xs) {
            for (double y : grid.y_values) {
                const AuxiliaryBundle b = aux_abcs(alpha, x, y);
                const double dA = b.g2 / (b.phi * b.phi * b.phi);
                const double coeff = alpha / (b.phi * dA);
                const double lead = 2.0 * x / b.phi - 1.0 - alpha * x;
                const double d3 = coeff * y + lead - b.S;
                const NamedValues where{{"alpha", alpha}, {"x", x}, {"y", y}};
                const auto ops = [&] {
                    auto v = detail::bundle_operands(b);
                    v.insert(v.end(), {{"A'", dA}, {"alpha/(phi A')", coeff}, {"d3", d3}});
                    return v;
                };
                const double band = detail::sign_band(std::abs(lead) + b.S + std::abs(coeff) * y, tol);
                if (alpha < 0.0) {
                    rec.at_least("alpha/(phi A')>=1", coeff, 1.0, detail::sign_band(coeff, tol), where, ops);
                } else {
                    rec.at_most("alpha/(phi A')<=0", coeff, 0.0, detail::sign_band(coeff, tol), where, ops);
                    rec.at_most("d3<=(2x/phi-1-ax)-S", d3, lead - b.S, band, where, ops);
                    rec.at_most("d3<=0", d3, 0.0, band, where, ops);
                    if (2.0 * (1.0 - alpha * x) + y >= 0.0) {
                        rec.at_least("S>=|2x/phi-1-ax|", b.S, std::abs(lead), band, where, ops);
                        rec.at_most("(2x/phi-1-ax)-S<=0", lead - b.S, 0.0, band, where, ops);
                    }
                }
            }
        }
    }
    return std::move(rec.report());
}

} // namespace gmeans
