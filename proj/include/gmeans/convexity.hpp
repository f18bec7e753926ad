#pragma once

// Log-convexity machinery: the D operator (D(f) >= 0 iff ln f is convex in
// ln x), the two equivalent forms of Delta = D(h) - D(phi), the thresholds
// y0 and the piecewise slope bound, and grid checks of each criterion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "entire_function.hpp"
#include "errors.hpp"
#include "integral_means.hpp"
#include "special_fn.hpp"
#include "tolerance.hpp"

namespace gmeans {

/// A positive function value with its first two derivatives at some x.
struct FunctionJet {
    double value;
    double d1;
    double d2;
};

/// D(f) = f'/f + x f''/f - x (f'/f)^2
inline double d_operator(const FunctionJet& j, double x)
{
    if (!(j.value > 0.0)) throw domain_fault("d_operator: jet value must be positive");
    if (!(x > 0.0)) throw domain_fault("d_operator: x must be positive");
    const double r = j.d1 / j.value;
    return r + x * j.d2 / j.value - x * r * r;
}

/// Sum of the magnitudes of the three terms of D; the natural zero scale.
inline double d_operator_scale(const FunctionJet& j, double x)
{
    const double r = j.d1 / j.value;
    return std::abs(r) + std::abs(x * j.d2 / j.value) + x * r * r;
}

/// Jet of num/den.
inline FunctionJet quotient_jet(const FunctionJet& num, const FunctionJet& den)
{
    const double d = den.value;
    const double q = num.value / d;
    const double q1 = (num.d1 - q * den.d1) / d;
    const double q2 = num.d2 / d - 2.0 * num.d1 * den.d1 / (d * d) - q * den.d2 / d +
                      2.0 * q * den.d1 * den.d1 / (d * d);
    return {q, q1, q2};
}

inline FunctionJet phi_jet(double alpha, double x)
{
    const auto [f, df] = phi(alpha, x);
    return {f, df, -alpha * df};
}

/// h' = M phi', h'' = (M' - alpha M) phi'.
inline FunctionJet h_jet(double h, const CircleMean& m, double alpha)
{
    const double df = phi(alpha, m.x).dphi;
    return {h, m.value * df, (m.dM - alpha * m.value) * df};
}

/// D(phi) = (phi - x) phi' / phi^2
inline double d_of_phi(double alpha, double x)
{
    if (!(x > 0.0)) throw domain_fault("d_of_phi: x must be positive");
    const auto [f, df] = phi(alpha, x);
    return (f - x) * df / (f * f);
}

/// y = x M'/M and its derivative (x M'/M)' (which equals D(M)).
struct SlopeFunction {
    double y;
    double dy;
};

inline SlopeFunction slope_function(const CircleMean& m)
{
    const FunctionJet j{m.value, m.dM, m.d2M};
    return {m.x * m.dM / m.value, d_operator(j, m.x)};
}

/// Delta computed directly and through the quadratic form in h/M.
struct DeltaPair {
    double direct;    ///< D(h) - D(phi)
    double quadratic; ///< -A (h/M)^2 + B (h/M) - C
    bool signs_agree;
    double d_h;
    double d_phi;
    double ratio; ///< h / M
    double direct_scale;
    double quadratic_scale;
    AuxiliaryBundle aux;
};

inline DeltaPair delta_from_values(double alpha, const CircleMean& m, double h, const Tolerances& tol = {})
{
    const double x = m.x;
    if (!(m.value > 0.0) || !(h > 0.0)) throw domain_fault("delta: M and h must be positive");
    const double y = std::max(0.0, x * m.dM / m.value);
    const AuxiliaryBundle aux = aux_abcs(alpha, x, y);
    const FunctionJet hj = h_jet(h, m, alpha);
    const FunctionJet pj = phi_jet(alpha, x);
    const double dh = d_operator(hj, x);
    const double dp = d_operator(pj, x);
    const double r = h / m.value;
    const double quad = -aux.A * r * r + aux.B * r - aux.C;
    const double direct = dh - dp;
    const double sd = d_operator_scale(hj, x) + d_operator_scale(pj, x);
    const double sq = std::abs(aux.A) * r * r + std::abs(aux.B) * r + std::abs(aux.C);
    const bool zd = near_zero(direct, sd, tol.sign);
    const bool zq = near_zero(quad, sq, tol.sign);
    const bool agree = (zd && zq) || (!zd && !zq && ((direct > 0.0) == (quad > 0.0)));
    return {direct, quad, agree, dh, dp, r, sd, sq, aux};
}

inline DeltaPair delta_both_ways(const EntireFunction& f, const MeanParams& params, double x, const Tolerances& tol = {})
{
    if (!(x > 0.0)) throw domain_fault("delta_both_ways: x must be positive");
    const CircleMean m = circle_mean(f, params.p, x, tol.quadrature);
    const double h = h_at(f, params, x, tol.quadrature);
    return delta_from_values(params.alpha, m, h, tol);
}

/// Slope threshold of the first convexity criterion:
///   y0 = g1 g2 / ((phi - x) g3),  alpha < 0.
inline double y0_threshold(double alpha, double x)
{
    if (!(alpha < 0.0)) throw domain_fault("y0_threshold: alpha must be negative");
    if (!(x > 0.0)) throw domain_fault("y0_threshold: x must be positive");
    const double f = phi(alpha, x).phi;
    const auto [g1, g2, g3] = aux_g(alpha, x);
    const double den = (f - x) * g3;
    if (!(den > 0.0) || !std::isfinite(den)) throw domain_fault("y0_threshold: denominator vanishes at x = " + std::to_string(x));
    return g1 * g2 / den;
}

/// Lower bound on (x M'/M)': 0 below x0, g1^2 / (4x (phi - x)^2) from x0 on.
inline double theorem2_bound(double alpha, double x)
{
    if (!(alpha < 0.0)) throw domain_fault("theorem2_bound: alpha must be negative");
    if (!(x > 0.0)) throw domain_fault("theorem2_bound: x must be positive");
    const double x0 = x0_of_alpha(alpha);
    const double f = phi(alpha, x).phi;
    const double g1 = aux_g(alpha, x).g1;
    const double upper = g1 * g1 / (4.0 * x * (f - x) * (f - x));
    if (std::abs(x - x0) < 1e-6 * x0) return std::max(0.0, upper);
    return x < x0 ? 0.0 : upper;
}

/// Radius sqrt(t0 / -alpha) below which every Gaussian mean is log-convex.
inline double corollary1_radius(double alpha)
{
    if (!(alpha < 0.0)) throw domain_fault("corollary1_radius: alpha must be negative");
    return std::sqrt(t0() / (-alpha));
}

// ---------------------------------------------------------------------------
// Criterion reports

enum class Criterion { theorem1, theorem2, theorem3, corollary1, corollary2, corollary3 };
enum class Verdict { holds, fails, hypotheses_not_met };

inline std::string_view to_string(Criterion c)
{
    switch (c) {
    case Criterion::theorem1: return "theorem1";
    case Criterion::theorem2: return "theorem2";
    case Criterion::theorem3: return "theorem3";
    case Criterion::corollary1: return "corollary1";
    case Criterion::corollary2: return "corollary2";
    case Criterion::corollary3: return "corollary3";
    }
    return "?";
}

inline std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::hypotheses_not_met: return "hypotheses-not-met";
    }
    return "?";
}

struct Witness {
    double x;
    double slack; ///< >= 0 means satisfied
    double zero_band; ///< |slack| below this counts as zero
    std::string condition;
};

struct CriterionReport {
    Criterion criterion;
    double x_lo;
    double x_hi;
    Verdict verdict;
    std::vector<Witness> witnesses;
    Tolerances tolerances;
    std::size_t points = 0;
    std::size_t hypothesis_violations = 0;
    std::size_t conclusion_violations = 0;
};

struct AnalysisOptions {
    std::size_t points = 512;
    std::size_t witnesses = 5;
    double x_min = 0.0; ///< lower grid end for checks on (0, x]; 0 selects 1e-3 * upper end
    Tolerances tol;
};

/// Everything the criteria need at one grid point.
struct PointAnalysis {
    double x;
    CircleMean M;
    double h;
    double d_M;
    double d_M_scale;
    double y;
    double d_mean; ///< D(h/phi) from the quotient jet
    double d_mean_scale;
};

/// Evaluates jets of M, h and h/phi on a geometric x-grid over [x_lo, x_hi].
inline std::vector<PointAnalysis> analyze_grid(const EntireFunction& f, const MeanParams& params, double x_lo,
                                               double x_hi, std::size_t points, double quad_tol)
{
    if (!(x_lo > 0.0) || !(x_hi > x_lo)) throw domain_fault("analysis interval must satisfy 0 < x_lo < x_hi");
    const GeometricGrid grid(std::sqrt(x_lo), std::sqrt(x_hi), std::max<std::size_t>(points, 3));
    const MeanProfile prof = radial_mean_profile(f, params, grid, quad_tol);
    std::vector<PointAnalysis> out;
    out.reserve(prof.points.size());
    for (const auto& pt : prof.points) {
        const CircleMean m{pt.x, pt.M, 0.0, pt.dM, pt.d2M, 0};
        const FunctionJet mj{pt.M, pt.dM, pt.d2M};
        const FunctionJet hj = h_jet(pt.h, m, params.alpha);
        const FunctionJet pj = phi_jet(params.alpha, pt.x);
        const FunctionJet qj = quotient_jet(hj, pj);
        out.push_back({pt.x, m, pt.h, d_operator(mj, pt.x), d_operator_scale(mj, pt.x), pt.x * pt.dM / pt.M,
                       d_operator(qj, pt.x), d_operator_scale(hj, pt.x) + d_operator_scale(pj, pt.x)});
    }
    return out;
}

namespace detail {

struct Condition {
    std::string name;
    // Returns {slack, scale}; slack >= 0 means satisfied.
    std::function<std::pair<double, double>(const PointAnalysis&)> eval;
};

inline void keep_tightest(std::vector<Witness>& w, std::size_t k)
{
    std::stable_sort(w.begin(), w.end(), [](const Witness& a, const Witness& b) {
        return a.slack / a.zero_band < b.slack / b.zero_band;
    });
    if (w.size() > k) w.resize(k);
}

inline CriterionReport evaluate_criterion(Criterion which, std::span<const PointAnalysis> grid,
                                          const std::vector<Condition>& hypotheses, const Condition& conclusion,
                                          const AnalysisOptions& opts)
{
    CriterionReport rep{which, grid.front().x, grid.back().x, Verdict::holds, {}, opts.tol, grid.size(), 0, 0};
    const auto run = [&](const Condition& c, std::vector<Witness>& all, std::size_t& violations) {
        for (const auto& pt : grid) {
            const auto [slack, scale] = c.eval(pt);
            const double zero = opts.tol.sign * (1.0 + std::abs(scale));
            if (slack < -zero) ++violations;
            all.push_back({pt.x, slack, zero, c.name});
        }
    };
    std::vector<Witness> hyp;
    for (const auto& h : hypotheses) run(h, hyp, rep.hypothesis_violations);
    if (rep.hypothesis_violations > 0) {
        rep.verdict = Verdict::hypotheses_not_met;
        keep_tightest(hyp, opts.witnesses);
        rep.witnesses = std::move(hyp);
        return rep;
    }
    std::vector<Witness> con;
    run(conclusion, con, rep.conclusion_violations);
    rep.verdict = rep.conclusion_violations > 0 ? Verdict::fails : Verdict::holds;
    keep_tightest(con, opts.witnesses);
    rep.witnesses = std::move(con);
    return rep;
}

inline Condition positive_mean()
{
    return {"M>0", [](const PointAnalysis& p) { return std::pair{p.M.value, 0.0}; }};
}

inline Condition nondecreasing_mean()
{
    return {"M'>=0", [](const PointAnalysis& p) { return std::pair{p.M.dM * p.x / p.M.value, 0.0}; }};
}

inline Condition log_convex_mean()
{
    return {"D(M)>=0", [](const PointAnalysis& p) { return std::pair{p.d_M, p.d_M_scale}; }};
}

inline Condition log_concave_mean()
{
    return {"D(M)<=0", [](const PointAnalysis& p) { return std::pair{-p.d_M, p.d_M_scale}; }};
}

inline Condition convex_conclusion()
{
    return {"D(h/phi)>=0", [](const PointAnalysis& p) { return std::pair{p.d_mean, p.d_mean_scale}; }};
}

inline Condition concave_conclusion()
{
    return {"D(h/phi)<=0", [](const PointAnalysis& p) { return std::pair{-p.d_mean, p.d_mean_scale}; }};
}

inline double lower_end(double x_hi, const AnalysisOptions& opts)
{
    return opts.x_min > 0.0 ? opts.x_min : 1e-3 * x_hi;
}

} // namespace detail

/// First convexity criterion on an interval I = (x_lo, x_hi), alpha < 0:
/// (i) D(M) >= 0 and (ii) x M'/M >= y0 on I imply D(h/phi) >= 0 on I.
inline CriterionReport check_theorem1(const EntireFunction& f, const MeanParams& params, double x_lo, double x_hi,
                                      const AnalysisOptions& opts = {})
{
    if (!(params.alpha < 0.0)) throw domain_fault("check_theorem1: alpha must be negative");
    const double alpha = params.alpha;
    const auto grid = analyze_grid(f, params, x_lo, x_hi, opts.points, opts.tol.quadrature);
    std::vector<detail::Condition> hyp{detail::positive_mean(), detail::nondecreasing_mean(), detail::log_convex_mean(),
                                       {"y>=y0", [alpha](const PointAnalysis& p) {
                                            const double y0 = y0_threshold(alpha, p.x);
                                            return std::pair{p.y - y0, std::abs(p.y) + std::abs(y0)};
                                        }}};
    return detail::evaluate_criterion(Criterion::theorem1, grid, hyp, detail::convex_conclusion(), opts);
}

/// Second convexity criterion on (0, x_max], alpha < 0:
/// (x M'/M)' >= theorem2_bound(x) implies D(h/phi) >= 0.
inline CriterionReport check_theorem2(const EntireFunction& f, const MeanParams& params, double x_max,
                                      const AnalysisOptions& opts = {}, Criterion label = Criterion::theorem2)
{
    if (!(params.alpha < 0.0)) throw domain_fault("check_theorem2: alpha must be negative");
    const double alpha = params.alpha;
    const auto grid = analyze_grid(f, params, detail::lower_end(x_max, opts), x_max, opts.points, opts.tol.quadrature);
    std::vector<detail::Condition> hyp{detail::positive_mean(), detail::nondecreasing_mean(),
                                       {"(xM'/M)'>=bound", [alpha](const PointAnalysis& p) {
                                            const double b = theorem2_bound(alpha, p.x);
                                            return std::pair{p.d_M - b, p.d_M_scale + std::abs(b)};
                                        }}};
    return detail::evaluate_criterion(label, grid, hyp, detail::convex_conclusion(), opts);
}

/// Concavity criterion, alpha >= 0: D(M) <= 0 implies D(h/phi) <= 0.
inline CriterionReport check_theorem3(const EntireFunction& f, const MeanParams& params, double x_lo, double x_hi,
                                      const AnalysisOptions& opts = {}, Criterion label = Criterion::theorem3)
{
    if (!(params.alpha >= 0.0)) throw domain_fault("check_theorem3: alpha must be nonnegative");
    const auto grid = analyze_grid(f, params, x_lo, x_hi, opts.points, opts.tol.quadrature);
    std::vector<detail::Condition> hyp{detail::positive_mean(), detail::nondecreasing_mean(), detail::log_concave_mean()};
    return detail::evaluate_criterion(label, grid, hyp, detail::concave_conclusion(), opts);
}

/// Convexity on (0, x0) for every f, alpha < 0; the only hypotheses are the
/// standing ones (M > 0, M' >= 0, D(M) >= 0).
inline CriterionReport check_corollary1(const EntireFunction& f, const MeanParams& params,
                                        const AnalysisOptions& opts = {})
{
    if (!(params.alpha < 0.0)) throw domain_fault("check_corollary1: alpha must be negative");
    const double x0 = x0_of_alpha(params.alpha);
    // Stay strictly inside the open interval.
    const double hi = x0 * (1.0 - 1e-9);
    const auto grid = analyze_grid(f, params, detail::lower_end(hi, opts), hi, opts.points, opts.tol.quadrature);
    std::vector<detail::Condition> hyp{detail::positive_mean(), detail::nondecreasing_mean(), detail::log_convex_mean()};
    return detail::evaluate_criterion(Criterion::corollary1, grid, hyp, detail::convex_conclusion(), opts);
}

/// Same code path as check_theorem2.
inline CriterionReport check_corollary2(const EntireFunction& f, const MeanParams& params, double x_max,
                                        const AnalysisOptions& opts = {})
{
    return check_theorem2(f, params, x_max, opts, Criterion::corollary2);
}

/// Concavity of the Gaussian mean of a monomial, alpha >= 0.
inline CriterionReport check_corollary3(const EntireFunction& f, const MeanParams& params, double x_lo, double x_hi,
                                        const AnalysisOptions& opts = {})
{
    if (!f.is_monomial()) {
        return {Criterion::corollary3, x_lo, x_hi, Verdict::hypotheses_not_met,
                {{x_lo, -1.0, 0.0, "f is a monomial"}}, opts.tol, 0, 1, 0};
    }
    return check_theorem3(f, params, x_lo, x_hi, opts, Criterion::corollary3);
}

// ---------------------------------------------------------------------------
// Brute-force second-difference oracle

enum class LogVariable { radius, squared_radius };

struct SecondDifference {
    double r;
    double value;    ///< centered second difference of ln(mean) in ln r (or ln x)
    double tol_curv; ///< zero band for this point
};

enum class Shape { convex, concave, linear, mixed };

inline std::string_view to_string(Shape s)
{
    switch (s) {
    case Shape::convex: return "convex";
    case Shape::concave: return "concave";
    case Shape::linear: return "linear";
    case Shape::mixed: return "mixed";
    }
    return "?";
}

/// Centered second differences of ln(mean) with respect to ln r on a
/// geometric grid. The zero band per point is
///   |fourth difference| / (12 step^2) + 4 * quad_tol / step^2,
/// the truncation estimate plus the amplified quadrature error.
inline std::vector<SecondDifference> loglog_second_difference(const MeanProfile& profile, double quad_tol,
                                                              LogVariable var = LogVariable::radius)
{
    const auto& pts = profile.points;
    const std::size_t n = pts.size();
    if (n < 3) throw domain_fault("loglog_second_difference: need at least 3 points");
    const auto coord = [&](std::size_t i) { return var == LogVariable::radius ? std::log(pts[i].r) : std::log(pts[i].x); };
    const double step = (coord(n - 1) - coord(0)) / double(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs((coord(i) - coord(i - 1)) - step) > 1e-9 * std::max(1.0, std::abs(step))) {
            throw domain_fault("loglog_second_difference: grid is not geometric");
        }
    }
    std::vector<double> L(n);
    for (std::size_t i = 0; i < n; ++i) L[i] = std::log(pts[i].mean);
    const double h2 = step * step;
    std::vector<SecondDifference> out;
    out.reserve(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double sd = (L[i + 1] - 2.0 * L[i] + L[i - 1]) / h2;
        double trunc = 0.0;
        if (n >= 5) {
            const std::size_t c = std::clamp<std::size_t>(i, 2, n - 3);
            const double d4 = L[c - 2] - 4.0 * L[c - 1] + 6.0 * L[c] - 4.0 * L[c + 1] + L[c + 2];
            trunc = std::abs(d4) / (12.0 * h2);
        }
        out.push_back({pts[i].r, sd, trunc + 4.0 * quad_tol / h2});
    }
    return out;
}

inline Shape classify(std::span<const SecondDifference> sd)
{
    const bool convex = std::all_of(sd.begin(), sd.end(), [](const auto& s) { return s.value >= -s.tol_curv; });
    const bool concave = std::all_of(sd.begin(), sd.end(), [](const auto& s) { return s.value <= s.tol_curv; });
    if (convex && concave) return Shape::linear;
    if (convex) return Shape::convex;
    if (concave) return Shape::concave;
    return Shape::mixed;
}

} // namespace gmeans
