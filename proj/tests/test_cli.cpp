#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include <gmeans/cli.hpp>

using namespace gmeans;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int status = cli::main_entry(args, out, err);
    return {status, out.str(), err.str()};
}

// Clears GMEANS_OUTPUT_DIR and pins the timestamp for the life of the guard.
struct EnvGuard {
    EnvGuard()
    {
        ::unsetenv("GMEANS_OUTPUT_DIR");
        ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    }
    ~EnvGuard()
    {
        ::unsetenv("GMEANS_OUTPUT_DIR");
        ::unsetenv("SOURCE_DATE_EPOCH");
    }
};

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

fs::path scratch_dir(const std::string& name)
{
    const auto d = fs::temp_directory_path() / ("gmeans-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("roots prints t0 and x0")
{
    EnvGuard env;
    const auto r = invoke({"roots", "--precision", "1e-12"});
    REQUIRE(r.status == 0);
    REQUIRE(r.out.rfind("t0=1.79", 0) == 0);
    const double t = std::stod(r.out.substr(3));
    CHECK(std::round(t * 1e4) / 1e4 == 1.7933);

    const auto x = invoke({"roots", "--alpha", "-1,-2"});
    REQUIRE(x.status == 0);
    const auto ls = lines(x.out);
    REQUIRE(ls.size() == 5);
    CHECK(ls[3].rfind("x0(alpha=-1)=1.79328213290076", 0) == 0);
    CHECK(ls[4].rfind("x0(alpha=-2)=0.89664106645038", 0) == 0);

    CHECK(invoke({"roots", "--alpha", "1"}).status == 2);
}

TEST_CASE("means csv rows")
{
    EnvGuard env;
    const auto r = invoke({"means", "--f", "mono:1", "--p", "2", "--alpha", "1", "--rmin", "0.5", "--rmax", "2",
                           "--points", "3", "--format", "csv"});
    REQUIRE(r.status == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] == "r,x,M,h,phi,mean");
    std::vector<double> row;
    std::istringstream cells(ls[2]);
    for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::stod(cell));
    REQUIRE(row.size() == 6);
    CHECK(row[0] == 1.0);
    CHECK(row[1] == 1.0);
    CHECK_THAT(row[5], Catch::Matchers::WithinAbs(0.4180233, 5e-8));
    CHECK_THAT(row[5], Catch::Matchers::WithinRel(row[3] / (2 * std::numbers::pi * row[4]), 1e-15));
}

TEST_CASE("means json document")
{
    EnvGuard env;
    const auto r = invoke({"means", "--f", "mono:0", "--points", "4", "--tol-quadrature", "1e-9"});
    REQUIRE(r.status == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["schema"] == 1);
    CHECK(doc["tool"] == "gmeans");
    CHECK(doc["timestamp"] == "2023-11-14T22:13:20Z");
    CHECK(doc["command"].get<std::string>().find("means --f mono:0") != std::string::npos);
    CHECK(doc["tolerances"]["quadrature"].get<double>() == 1e-9);
    CHECK(doc["tolerances"]["sign"].get<double>() == 1e-9);
    CHECK(doc["grid"]["count"] == 4);
    for (const auto& row : doc["payload"]["profile"]["rows"]) CHECK_THAT(row["mean"].get<double>(), Catch::Matchers::WithinRel(1.0, 1e-9));
}

TEST_CASE("verify suites on defaults")
{
    EnvGuard env;
    for (const char* suite : {"lemma4", "d3"}) {
        const auto r = invoke({"verify", "--suite", suite});
        CAPTURE(suite, r.err);
        CHECK(r.status == 0);
        const auto doc = nlohmann::json::parse(r.out);
        CHECK(doc["payload"]["failures"].empty());
        CHECK(doc["payload"]["verdict"] == "pass");
    }
    CHECK(invoke({"verify", "--suite", "dchain", "--alpha", "-1", "--x", "3"}).status == 0);
    CHECK(invoke({"verify", "--suite", "lemma5", "--f", "poly:1,1", "--alpha", "-1", "--points", "40"}).status == 0);
    CHECK(invoke({"verify", "--suite", "delta", "--f", "mono:1", "--alpha", "1"}).status == 0);
}

TEST_CASE("failures exit 1 and carry operands")
{
    EnvGuard env;
    // A negative sign tolerance makes every exact zero of g1, g2, g3 at alpha = 0 a violation.
    const auto r = invoke({"verify", "--suite", "lemma4", "--alphas", "0", "--points", "5", "--tol-sign", "-1"});
    REQUIRE(r.status == 1);
    const auto doc = nlohmann::json::parse(r.out);
    REQUIRE_FALSE(doc["payload"]["failures"].empty());
    const auto& f = doc["payload"]["failures"][0];
    CHECK(f.contains("operands"));
    CHECK(f.contains("slack"));
}

TEST_CASE("usage errors exit 2")
{
    EnvGuard env;
    CHECK(invoke({}).status == 2);
    CHECK(invoke({"frobnicate"}).status == 2);
    CHECK(invoke({"verify"}).status == 2);
    CHECK(invoke({"verify", "--suite", "nope"}).status == 2);
    CHECK(invoke({"means", "--p", "-1"}).status == 2);
    CHECK(invoke({"means", "--rmin", "2", "--rmax", "1"}).status == 2);
    CHECK(invoke({"means", "--f", "mono:-1"}).status == 2);
    CHECK(invoke({"means", "--f", "poly:1,x"}).status == 2);
    CHECK(invoke({"means", "--format", "xml"}).status == 2);
    CHECK(invoke({"verify", "--suite", "dchain", "--alpha", "-1", "--x", "1"}).status == 2);
    const auto r = invoke({"means", "--points", "1"});
    CHECK(r.status == 2);
    CHECK(r.err.find("points") != std::string::npos);
}

TEST_CASE("version and help exit 0")
{
    const auto v = invoke({"--version"});
    CHECK(v.status == 0);
    CHECK(v.out == std::string(GMEANS_VERSION) + "\n");
    CHECK(invoke({"--help"}).status == 0);
}

TEST_CASE("output goes to --output or the output directory")
{
    EnvGuard env;
    const auto dir = scratch_dir("out");
    const auto target = dir / "nested" / "m.csv";
    const auto r = invoke({"means", "--points", "3", "--format", "csv", "-o", target.string()});
    REQUIRE(r.status == 0);
    CHECK(r.out.empty());
    REQUIRE(fs::exists(target));
    std::ifstream in(target);
    std::string header;
    std::getline(in, header);
    CHECK(header == "r,x,M,h,phi,mean");

    ::setenv("GMEANS_OUTPUT_DIR", dir.c_str(), 1);
    CHECK(invoke({"roots"}).status == 0);
    CHECK(fs::exists(dir / "gmeans-roots.txt"));
    CHECK(invoke({"verify", "--suite", "lemma4", "--points", "10"}).status == 0);
    CHECK(fs::exists(dir / "gmeans-verify.json"));
    const auto dash = invoke({"roots", "-o", "-"});
    CHECK(dash.out.rfind("t0=", 0) == 0);

    for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("reports are reproducible with a pinned timestamp")
{
    EnvGuard env;
    const std::vector<std::string> args{"analyze", "--f", "poly:1,1", "--alpha", "-1", "--points", "64"};
    const auto a = invoke(args);
    const auto b = invoke(args);
    REQUIRE(a.status == b.status);
    CHECK(a.out == b.out);
    CHECK(invoke({"scan", "--alphas", "-1,1", "--ps", "2", "--points", "24"}).out ==
          invoke({"scan", "--alphas", "-1,1", "--ps", "2", "--points", "24"}).out);
}

TEST_CASE("analyze reports criteria and the oracle")
{
    EnvGuard env;
    const auto r = invoke({"analyze", "--f", "poly:1,1", "--alpha", "-1", "--points", "64"});
    CAPTURE(r.err);
    REQUIRE(r.status == 0);
    const auto doc = nlohmann::json::parse(r.out);
    const auto& p = doc["payload"];
    REQUIRE(p["criteria"].is_array());
    CHECK(p["criteria"].size() == 4);
    for (const auto& c : p["criteria"]) CHECK(c["verdict"] != "fails");
    CHECK(p.contains("oracle"));

    const auto pos = nlohmann::json::parse(invoke({"analyze", "--f", "mono:2", "--alpha", "1", "--points", "64"}).out);
    CHECK(pos["payload"]["criteria"].size() == 2);
}

TEST_CASE("scan csv map")
{
    EnvGuard env;
    const auto r = invoke({"scan", "--f", "poly:1,1", "--alphas", "-1,1", "--ps", "2", "--rmin", "0.1", "--rmax", "1.2",
                           "--points", "40", "--format", "csv"});
    REQUIRE(r.status == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "alpha,p,radius,inside,beyond");
    CHECK(ls[1].rfind("-1,2,1.33913484492815", 0) == 0);
    CHECK(ls[1].find(",convex,") != std::string::npos);
    CHECK(ls[2].rfind("1,2,inf,", 0) == 0);
}
