#pragma once

// Serialization of profiles, criterion reports and suite reports.
// JSON documents carry `schema: 1`; CSV floats use 17 significant digits.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "convexity.hpp"
#include "integral_means.hpp"
#include "special_fn.hpp"
#include "tolerance.hpp"
#include "verification.hpp"

#ifndef GMEANS_VERSION
#define GMEANS_VERSION "1.0.0"
#endif

namespace gmeans {

using json = nlohmann::ordered_json;

inline constexpr int report_schema = 1;

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

inline json to_json(const Tolerances& t)
{
    return {{"quadrature", t.quadrature},
            {"sign", t.sign},
            {"identity", t.identity},
            {"discriminant", t.discriminant},
            {"quotient_rule", t.quotient_rule}};
}

inline json to_json(const NamedValues& values)
{
    json out = json::object();
    for (const auto& [k, v] : values) out[k] = v;
    return out;
}

inline json to_json(const MeanProfile& prof)
{
    json rows = json::array();
    for (const auto& pt : prof.points) {
        rows.push_back({{"r", pt.r}, {"x", pt.x}, {"M", pt.M}, {"dM", pt.dM}, {"d2M", pt.d2M}, {"h", pt.h},
                        {"phi", pt.phi}, {"mean", pt.mean}});
    }
    return {{"p", prof.p}, {"alpha", prof.alpha}, {"tolerance", prof.tolerance}, {"h_error", prof.h_error}, {"rows", rows}};
}

inline json to_json(const CriterionReport& rep)
{
    json witnesses = json::array();
    for (const auto& w : rep.witnesses) {
        witnesses.push_back({{"x", w.x}, {"slack", w.slack}, {"zero_band", w.zero_band}, {"condition", w.condition}});
    }
    return {{"criterion", to_string(rep.criterion)},
            {"interval", {rep.x_lo, rep.x_hi}},
            {"verdict", to_string(rep.verdict)},
            {"points", rep.points},
            {"hypothesis_violations", rep.hypothesis_violations},
            {"conclusion_violations", rep.conclusion_violations},
            {"witnesses", witnesses},
            {"tolerances", to_json(rep.tolerances)}};
}

inline json to_json(const SuiteReport& rep)
{
    json failures = json::array();
    for (const auto& f : rep.failures) {
        failures.push_back({{"check", f.check},
                            {"parameters", to_json(f.parameters)},
                            {"lhs", f.lhs},
                            {"rhs", f.rhs},
                            {"slack", f.slack},
                            {"operands", to_json(f.operands)}});
    }
    return {{"suite", rep.suite},
            {"verdict", to_string(rep.verdict())},
            {"checks_run", rep.checks_run},
            {"failure_count", rep.failures.size()},
            {"failures", failures},
            {"summary", to_json(rep.summary)},
            {"tolerances", to_json(rep.tolerances)}};
}

inline json to_json(std::span<const SecondDifference> sd)
{
    json rows = json::array();
    for (const auto& s : sd) rows.push_back({{"r", s.r}, {"second_difference", s.value}, {"tol_curv", s.tol_curv}});
    return {{"shape", to_string(classify(sd))}, {"points", rows}};
}

inline std::string profile_csv(const MeanProfile& prof)
{
    std::string out = "r,x,M,h,phi,mean\n";
    for (const auto& pt : prof.points) {
        for (double v : {pt.r, pt.x, pt.M, pt.h, pt.phi}) {
            out += format_double(v);
            out += ',';
        }
        out += format_double(pt.mean);
        out += '\n';
    }
    return out;
}

/// UTC timestamp; SOURCE_DATE_EPOCH overrides the clock.
inline std::string report_timestamp()
{
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        long long v = 0;
        const std::string_view s(env);
        if (const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v); ec == std::errc{}) t = std::time_t(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ReportDocument {
    std::string command;              ///< echoed command line
    std::string timestamp;
    Tolerances tolerances;
    json grid = json::object();
    json payload = json::object();

    json to_json() const
    {
        return {{"schema", report_schema},
                {"tool", "gmeans"},
                {"version", GMEANS_VERSION},
                {"command", command},
                {"timestamp", timestamp},
                {"tolerances", gmeans::to_json(tolerances)},
                {"grid", grid},
                {"payload", payload}};
    }

    std::string dump() const { return to_json().dump(2) + "\n"; }
};

} // namespace gmeans
