#pragma once

// Command-line front end. `run` turns a CommandConfig into a report and an
// exit status; `main_entry` adds argument parsing and output handling.
//
// Exit status: 0 all asserted checks pass, 1 failures present (or a numerical
// failure), 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "convexity.hpp"
#include "errors.hpp"
#include "function_spec.hpp"
#include "integral_means.hpp"
#include "report.hpp"
#include "special_fn.hpp"
#include "verification.hpp"

namespace gmeans::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failures = 1;
inline constexpr int exit_usage = 2;

struct CommandConfig {
    std::string command;
    std::string function = "mono:1";
    double p = 2.0;
    double alpha = 0.0;
    std::vector<double> alphas;
    std::vector<double> ps;
    double r_min = 0.5;
    double r_max = 2.0;
    std::size_t points = 0; ///< 0 selects the per-command default
    std::string theorem = "auto";
    double x_lo = 0.0;      ///< 0 selects the per-command default
    double x_hi = 0.0;
    std::string suite;
    double x = 3.0;
    std::vector<double> probes{0.1, 0.01, 0.001};
    double precision = 1e-12;
    Tolerances tol;
    std::string format;     ///< empty selects the per-command default
    std::string output;
    std::string echo;       ///< command line as typed, for the report

    void validate() const
    {
        if (!(p > 0.0) || !std::isfinite(p)) throw domain_fault("p must be positive");
        if (!std::isfinite(alpha)) throw domain_fault("alpha must be finite");
        if (!(r_min > 0.0)) throw domain_fault("r_min must be positive");
        if (!(r_max > r_min)) throw domain_fault("r_max must exceed r_min");
        if (points != 0 && points < 3) throw domain_fault("points must be at least 3");
        if (x_lo < 0.0 || x_hi < 0.0 || (x_lo > 0.0 && x_hi > 0.0 && !(x_hi > x_lo))) {
            throw domain_fault("interval must satisfy 0 < xlo < xhi");
        }
        for (double q : ps)
            if (!(q > 0.0)) throw domain_fault("p values must be positive");
        if (!(precision > 0.0)) throw domain_fault("precision must be positive");
        if (!(tol.quadrature > 0.0 && tol.quadrature <= 1e-2)) throw domain_fault("quadrature tolerance must lie in (0, 1e-2]");
    }
};

struct RunResult {
    ReportDocument document;
    std::string text; ///< rendered output in the requested format
    int exit_status = exit_ok;
};

namespace detail {

inline std::string format_or(const CommandConfig& c, std::string fallback, std::initializer_list<std::string_view> allowed)
{
    const std::string fmt = c.format.empty() ? std::move(fallback) : c.format;
    for (auto a : allowed)
        if (fmt == a) return fmt;
    throw parse_error("format '" + fmt + "' is not available for '" + c.command + "'");
}

inline std::size_t points_per_decade(double r_min, double r_max)
{
    return std::size_t(std::ceil(200.0 * std::log10(r_max / r_min))) + 1;
}

inline std::vector<double> default_alphas() { return {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}; }

inline ReportDocument base_document(const CommandConfig& c)
{
    ReportDocument d;
    d.command = c.echo;
    d.timestamp = report_timestamp();
    d.tolerances = c.tol;
    return d;
}

inline json grid_json(double lo, double hi, std::size_t count, std::string_view variable)
{
    return {{"variable", variable}, {"lo", lo}, {"hi", hi}, {"count", count}, {"spacing", "geometric"}};
}

inline RunResult run_means(const CommandConfig& c)
{
    const std::string fmt = format_or(c, "json", {"json", "csv"});
    const EntireFunction f = parse_function_spec(c.function);
    const MeanParams params(c.p, c.alpha);
    const std::size_t n = c.points ? c.points : points_per_decade(c.r_min, c.r_max);
    const MeanProfile prof = radial_mean_profile(f, params, GeometricGrid(c.r_min, c.r_max, n), c.tol.quadrature);

    RunResult out{base_document(c), {}, exit_ok};
    out.document.grid = grid_json(c.r_min, c.r_max, n, "r");
    out.document.payload = {{"function", c.function}, {"profile", to_json(prof)}};
    out.text = fmt == "csv" ? profile_csv(prof) : out.document.dump();
    return out;
}

inline std::vector<Criterion> selected_criteria(const CommandConfig& c, const EntireFunction& f)
{
    const auto& t = c.theorem;
    if (t == "auto") {
        if (c.alpha < 0.0) return {Criterion::theorem1, Criterion::theorem2, Criterion::corollary1, Criterion::corollary2};
        std::vector<Criterion> v{Criterion::theorem3};
        if (f.is_monomial()) v.push_back(Criterion::corollary3);
        return v;
    }
    if (t == "1" || t == "theorem1") return {Criterion::theorem1};
    if (t == "2" || t == "theorem2") return {Criterion::theorem2};
    if (t == "3" || t == "theorem3") return {Criterion::theorem3};
    if (t == "c1" || t == "corollary1") return {Criterion::corollary1};
    if (t == "c2" || t == "corollary2") return {Criterion::corollary2};
    if (t == "c3" || t == "corollary3") return {Criterion::corollary3};
    throw parse_error("unknown theorem selector '" + t + "'");
}

inline RunResult run_analyze(const CommandConfig& c)
{
    format_or(c, "json", {"json"});
    const EntireFunction f = parse_function_spec(c.function);
    const MeanParams params(c.p, c.alpha);
    const auto criteria = selected_criteria(c, f);
    const double x_lo = c.x_lo > 0.0 ? c.x_lo : 1e-2;
    const double x_hi = c.x_hi > 0.0 ? c.x_hi : (c.alpha < 0.0 ? x0_of_alpha(c.alpha) : 4.0);
    if (!(x_hi > x_lo)) throw domain_fault("interval must satisfy 0 < xlo < xhi");

    AnalysisOptions opts;
    opts.points = c.points ? c.points : 512;
    opts.x_min = x_lo;
    opts.tol = c.tol;

    RunResult out{base_document(c), {}, exit_ok};
    json reports = json::array();
    for (Criterion which : criteria) {
        CriterionReport rep = [&] {
            switch (which) {
            case Criterion::theorem1: return check_theorem1(f, params, x_lo, x_hi, opts);
            case Criterion::theorem2: return check_theorem2(f, params, x_hi, opts);
            case Criterion::theorem3: return check_theorem3(f, params, x_lo, x_hi, opts);
            case Criterion::corollary1: return check_corollary1(f, params, opts);
            case Criterion::corollary2: return check_corollary2(f, params, x_hi, opts);
            case Criterion::corollary3: return check_corollary3(f, params, x_lo, x_hi, opts);
            }
            throw parse_error("unreachable criterion");
        }();
        if (rep.verdict == Verdict::fails) out.exit_status = exit_failures;
        reports.push_back(to_json(rep));
    }

    const MeanProfile prof =
        radial_mean_profile(f, params, GeometricGrid(std::sqrt(x_lo), std::sqrt(x_hi), opts.points), c.tol.quadrature);
    const auto sd = loglog_second_difference(prof, c.tol.quadrature);

    out.document.grid = grid_json(x_lo, x_hi, opts.points, "x");
    out.document.payload = {{"function", c.function},
                            {"p", c.p},
                            {"alpha", c.alpha},
                            {"criteria", reports},
                            {"oracle", to_json(std::span<const SecondDifference>(sd))}};
    out.text = out.document.dump();
    return out;
}

inline RunResult run_verify(const CommandConfig& c)
{
    format_or(c, "json", {"json"});
    RunResult out{base_document(c), {}, exit_ok};
    SuiteReport rep;
    json grid = json::object();
    if (c.suite == "lemma4" || c.suite == "d3") {
        GridSpec g{c.alphas.empty() ? detail::default_alphas() : c.alphas, c.x_lo > 0.0 ? c.x_lo : 1e-3,
                   c.x_hi > 0.0 ? c.x_hi : 20.0, c.points ? c.points : 400, {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0}};
        rep = c.suite == "lemma4" ? verify_lemma4(g, c.tol) : verify_d3_bounds(g, c.tol);
        grid = grid_json(g.x_lo, g.x_hi, g.count, "x");
        grid["alpha_values"] = g.alpha_values;
        if (c.suite == "d3") grid["y_values"] = g.y_values;
    } else if (c.suite == "lemma5") {
        const EntireFunction f = parse_function_spec(c.function);
        GridSpec g{{c.alpha}, c.x_lo > 0.0 ? c.x_lo : 1e-2, c.x_hi > 0.0 ? c.x_hi : 10.0, c.points ? c.points : 200, {}};
        rep = verify_lemma5(f, MeanParams(c.p, c.alpha), g, c.tol);
        grid = grid_json(g.x_lo, g.x_hi, g.count, "x");
    } else if (c.suite == "dchain") {
        const double alpha = c.alpha < 0.0 ? c.alpha : throw domain_fault("dchain needs alpha < 0");
        rep = verify_d_chain(alpha, c.x, {}, c.tol);
        grid = {{"alpha", alpha}, {"x", c.x}, {"y_points", DChainOptions{}.y_points}};
    } else if (c.suite == "delta") {
        const EntireFunction f = parse_function_spec(c.function);
        rep = verify_delta_boundary(f, MeanParams(c.p, c.alpha), c.probes, c.tol);
        grid = {{"probes", c.probes}};
    } else {
        throw parse_error("unknown suite '" + c.suite + "' (expected lemma4, lemma5, dchain, delta or d3)");
    }
    if (!rep.passed()) out.exit_status = exit_failures;
    out.document.grid = grid;
    out.document.payload = to_json(rep);
    if (c.suite == "lemma5" || c.suite == "delta") {
        out.document.payload["function"] = c.function;
        out.document.payload["p"] = c.p;
        out.document.payload["alpha"] = c.alpha;
    }
    out.text = out.document.dump();
    return out;
}

inline RunResult run_roots(const CommandConfig& c)
{
    const std::string fmt = format_or(c, "text", {"text", "json"});
    const RootResult t = solve_t0(c.precision);
    RunResult out{base_document(c), {}, exit_ok};
    json x0s = json::array();
    std::string text = "t0=" + format_double(t.value) + "\nresidual=" + format_double(t.residual) +
                       "\niterations=" + std::to_string(t.iterations) + "\n";
    for (double a : c.alphas) {
        if (!(a < 0.0)) throw domain_fault("x0 is defined only for alpha < 0 (got " + format_double(a) + ")");
        const double x0 = t.value / -a;
        const double g1 = aux_g(a, x0).g1;
        x0s.push_back({{"alpha", a}, {"x0", x0}, {"g1_residual", g1}, {"corollary_radius", std::sqrt(x0)}});
        text += "x0(alpha=" + format_double(a) + ")=" + format_double(x0) + " g1=" + format_double(g1) + "\n";
    }
    out.document.grid = {{"bracket", {1.0, 3.0}}, {"precision", c.precision}};
    out.document.payload = {{"t0", t.value}, {"residual", t.residual}, {"iterations", t.iterations}, {"x0", x0s}};
    out.text = fmt == "text" ? text : out.document.dump();
    return out;
}

inline std::string classify_range(std::span<const SecondDifference> sd)
{
    return sd.empty() ? "empty" : std::string(to_string(classify(sd)));
}

inline RunResult run_scan(const CommandConfig& c)
{
    const std::string fmt = format_or(c, "json", {"json", "csv"});
    const EntireFunction f = parse_function_spec(c.function);
    const auto alphas = c.alphas.empty() ? detail::default_alphas() : c.alphas;
    const auto ps = c.ps.empty() ? std::vector<double>{1.0, 2.0, 3.0} : c.ps;
    const std::size_t n = c.points ? c.points : points_per_decade(c.r_min, c.r_max);
    const GeometricGrid grid(c.r_min, c.r_max, n);

    RunResult out{base_document(c), {}, exit_ok};
    json cells = json::array();
    std::string csv = "alpha,p,radius,inside,beyond\n";
    for (double a : alphas) {
        for (double q : ps) {
            const MeanProfile prof = radial_mean_profile(f, MeanParams(q, a), grid, c.tol.quadrature);
            const auto sd = loglog_second_difference(prof, c.tol.quadrature);
            const double radius = a < 0.0 ? corollary1_radius(a) : std::numeric_limits<double>::infinity();
            const auto split = std::partition_point(sd.begin(), sd.end(), [&](const auto& s) { return s.r < radius; });
            const std::span<const SecondDifference> all(sd);
            const auto inside = classify_range(all.first(std::size_t(split - sd.begin())));
            const auto beyond = classify_range(all.subspan(std::size_t(split - sd.begin())));
            json cell = {{"alpha", a}, {"p", q}, {"inside", inside}, {"beyond", beyond}};
            cell["radius"] = std::isfinite(radius) ? json(radius) : json(nullptr);
            cells.push_back(cell);
            csv += format_double(a) + "," + format_double(q) + "," + (std::isfinite(radius) ? format_double(radius) : "inf") +
                   "," + inside + "," + beyond + "\n";
        }
    }
    out.document.grid = grid_json(c.r_min, c.r_max, n, "r");
    out.document.payload = {{"function", c.function}, {"cells", cells}};
    out.text = fmt == "csv" ? csv : out.document.dump();
    return out;
}

} // namespace detail

inline RunResult run(const CommandConfig& config)
{
    config.validate();
    const auto& cmd = config.command;
    if (cmd == "means") return detail::run_means(config);
    if (cmd == "analyze") return detail::run_analyze(config);
    if (cmd == "verify") return detail::run_verify(config);
    if (cmd == "roots") return detail::run_roots(config);
    if (cmd == "scan") return detail::run_scan(config);
    throw parse_error("unknown command '" + cmd + "'");
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial report.
inline void write_atomic(const std::filesystem::path& target, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    fs::create_directories(dir);
    const fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, target);
}

/// Destination for a report: --output, else $GMEANS_OUTPUT_DIR/gmeans-<command>.<ext>,
/// else standard output (empty path).
inline std::filesystem::path output_path(const CommandConfig& c, const std::string& text)
{
    if (!c.output.empty() && c.output != "-") return c.output;
    if (c.output == "-") return {};
    if (const char* dir = std::getenv("GMEANS_OUTPUT_DIR"); dir && *dir) {
        const bool is_json = !text.empty() && text.front() == '{';
        const bool is_csv = c.format == "csv";
        return std::filesystem::path(dir) / ("gmeans-" + c.command + (is_json ? ".json" : is_csv ? ".csv" : ".txt"));
    }
    return {};
}

namespace detail {

inline void add_tolerance_flags(CLI::App* app, CommandConfig& c)
{
    app->add_option("--tol-quadrature", c.tol.quadrature, "relative quadrature tolerance")->capture_default_str();
    app->add_option("--tol-sign", c.tol.sign, "zero band for sign tests")->capture_default_str();
    app->add_option("--tol-identity", c.tol.identity, "tolerance for exact identities")->capture_default_str();
    app->add_option("--tol-discriminant", c.tol.discriminant, "tolerance for the discriminant identity")->capture_default_str();
    app->add_option("--tol-quotient", c.tol.quotient_rule, "tolerance for the quotient rule")->capture_default_str();
}

inline void add_output_flags(CLI::App* app, CommandConfig& c)
{
    app->add_option("--format", c.format, "output format (csv, json or text)");
    app->add_option("-o,--output", c.output, "output file ('-' for stdout)");
}

inline void add_function_flags(CLI::App* app, CommandConfig& c)
{
    app->add_option("--f,--function", c.function, "function spec: mono:k, poly:a0,a1,..., exp:b, taylor:@path")
        ->capture_default_str();
    app->add_option("--p", c.p, "integrand power p > 0")->capture_default_str();
    app->add_option("--alpha", c.alpha, "Gaussian weight exponent")->capture_default_str();
}

inline void add_grid_flags(CLI::App* app, CommandConfig& c)
{
    app->add_option("--rmin", c.r_min, "smallest radius")->capture_default_str();
    app->add_option("--rmax", c.r_max, "largest radius")->capture_default_str();
    app->add_option("--points", c.points, "grid points (default 200 per decade)");
}

inline std::string echo_args(const std::vector<std::string>& args)
{
    std::string s = "gmeans";
    for (const auto& a : args) s += " " + a;
    return s;
}

} // namespace detail

/// Parses `args` (without the program name), runs the command and writes the
/// report. Returns the process exit status.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CommandConfig c;
    CLI::App app{"Gaussian integral means of entire functions and their log-convexity", "gmeans"};
    app.set_version_flag("--version", std::string(GMEANS_VERSION));
    app.require_subcommand(1);

    auto* means = app.add_subcommand("means", "tabulate r, x, M, h, phi and the Gaussian mean on a geometric grid");
    detail::add_function_flags(means, c);
    detail::add_grid_flags(means, c);

    auto* analyze = app.add_subcommand("analyze", "check the convexity criteria and the second-difference oracle");
    detail::add_function_flags(analyze, c);
    analyze->add_option("--theorem", c.theorem, "auto, 1, 2, 3, c1, c2 or c3")->capture_default_str();
    analyze->add_option("--xlo", c.x_lo, "lower end of the x interval (default 0.01)");
    analyze->add_option("--xhi", c.x_hi, "upper end of the x interval (default x0, or 4 for alpha >= 0)");
    analyze->add_option("--points", c.points, "grid points (default 512)");

    auto* verify = app.add_subcommand("verify", "run an inequality suite over a parameter grid");
    detail::add_function_flags(verify, c);
    verify->add_option("--suite", c.suite, "lemma4, lemma5, dchain, delta or d3")->required();
    verify->add_option("--alphas", c.alphas, "alpha values for lemma4 and d3")->delimiter(',');
    verify->add_option("--xlo", c.x_lo, "lower end of the x grid");
    verify->add_option("--xhi", c.x_hi, "upper end of the x grid");
    verify->add_option("--points", c.points, "x grid points");
    verify->add_option("--x", c.x, "x for the dchain suite")->capture_default_str();
    verify->add_option("--probes", c.probes, "decreasing x probes for the delta suite")->delimiter(',');

    auto* roots = app.add_subcommand("roots", "solve for t0 and x0 = t0/(-alpha)");
    roots->add_option("--precision", c.precision, "residual tolerance")->capture_default_str();
    roots->add_option("--alpha,--alphas", c.alphas, "negative alpha values")->delimiter(',');

    auto* scan = app.add_subcommand("scan", "classify the log-log shape of the mean over an (alpha, p) rectangle");
    scan->add_option("--f,--function", c.function, "function spec")->capture_default_str();
    scan->add_option("--alphas", c.alphas, "alpha values")->delimiter(',');
    scan->add_option("--ps", c.ps, "p values")->delimiter(',');
    detail::add_grid_flags(scan, c);

    for (auto* sub : {means, analyze, verify, roots, scan}) {
        detail::add_tolerance_flags(sub, c);
        detail::add_output_flags(sub, c);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << GMEANS_VERSION << "\n";
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "gmeans: " << e.what() << "\n";
        return exit_usage;
    }
    c.command = app.get_subcommands().front()->get_name();
    c.echo = detail::echo_args(args);

    RunResult result;
    try {
        result = run(c);
    } catch (const parse_error& e) {
        err << "gmeans: " << e.what() << "\n";
        return exit_usage;
    } catch (const domain_fault& e) {
        err << "gmeans: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "gmeans: " << c.command << " failed: " << e.what() << "\n";
        return exit_failures;
    }

    try {
        const auto path = output_path(c, result.text);
        if (path.empty()) {
            out << result.text;
        } else {
            write_atomic(path, result.text);
            err << "gmeans: wrote " << path.string() << "\n";
        }
    } catch (const std::exception& e) {
        err << "gmeans: " << e.what() << "\n";
        return exit_failures;
    }
    return result.exit_status;
}

} // namespace gmeans::cli
