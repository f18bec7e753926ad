#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include <gmeans/entire_function.hpp>
#include <gmeans/errors.hpp>
#include <gmeans/function_spec.hpp>

using namespace gmeans;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

const std::string data_dir = GMEANS_TEST_DATA;

double rel(complex a, complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST_CASE("monomial spec")
{
    const auto f = parse_function_spec("mono:3");
    REQUIRE(f.is_monomial());
    const auto& m = std::get<Monomial>(f.variant());
    CHECK(m.degree == 3);
    CHECK(m.coefficient == complex(1.0));
    CHECK(parse_function_spec("  mono:0 ").is_monomial());
}

TEST_CASE("polynomial spec with complex entries")
{
    const auto f = parse_function_spec("poly:1,0,2+1i");
    const auto c = f.coefficients();
    REQUIRE(c.has_value());
    REQUIRE(c->size() == 3);
    CHECK((*c)[0] == complex(1, 0));
    CHECK((*c)[1] == complex(0, 0));
    CHECK((*c)[2] == complex(2, 1));
    const complex z(0.3, -0.7);
    CHECK(rel(f(z), 1.0 + complex(2, 1) * z * z) < 1e-15);
}

TEST_CASE("complex number tokens")
{
    CHECK(parse_complex("2") == complex(2, 0));
    CHECK(parse_complex("-1.5") == complex(-1.5, 0));
    CHECK(parse_complex("3i") == complex(0, 3));
    CHECK(parse_complex("-i") == complex(0, -1));
    CHECK(parse_complex("i") == complex(0, 1));
    CHECK(parse_complex("2-1i") == complex(2, -1));
    CHECK(parse_complex("1e-3+2e+1j") == complex(1e-3, 20));
    CHECK(parse_complex(" +4 ") == complex(4, 0));
    CHECK(parse_complex("1-i") == complex(1, -1));
    for (const char* bad : {"", "x", "1+", "2+xi", "1..2", "nan", "inf", "1i2"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_complex(bad), parse_error);
    }
}

TEST_CASE("exponential spec")
{
    const auto f = parse_function_spec("exp:1");
    REQUIRE(std::holds_alternative<Exponential>(f.variant()));
    CHECK(rel(f(complex(0.5, 0.5)), std::exp(complex(0.5, 0.5))) < 1e-15);
    const auto g = parse_function_spec("exp:0.5-2i");
    CHECK(std::get<Exponential>(g.variant()).beta == complex(0.5, -2));
}

TEST_CASE("taylor spec loads coefficients and the tail bound")
{
    const auto f = parse_function_spec("taylor:@" + data_dir + "/exp_taylor.txt");
    const auto& t = std::get<TruncatedTaylor>(f.variant());
    CHECK(t.coefficients.size() == 21);
    CHECK(t.tail_bound == 1e-19);
    const complex z(0.6, -0.4);
    CHECK(rel(f(z), std::exp(z)) < 1e-15);
}

TEST_CASE("malformed specs name the offending token")
{
    CHECK_THROWS_WITH(parse_function_spec("mono:-1"), ContainsSubstring("degree must be nonnegative"));
    CHECK_THROWS_WITH(parse_function_spec("mono:x"), ContainsSubstring("'x'"));
    CHECK_THROWS_WITH(parse_function_spec("mono:"), ContainsSubstring("bad monomial degree"));
    CHECK_THROWS_WITH(parse_function_spec("poly:"), ContainsSubstring("empty coefficient list"));
    CHECK_THROWS_WITH(parse_function_spec("poly:1,,2"), ContainsSubstring("empty coefficient entry"));
    CHECK_THROWS_WITH(parse_function_spec("poly:1,2q"), ContainsSubstring("'2q'"));
    CHECK_THROWS_WITH(parse_function_spec("poly:0,0"), ContainsSubstring("nonzero"));
    CHECK_THROWS_WITH(parse_function_spec("sin:1"), ContainsSubstring("unknown function kind 'sin'"));
    CHECK_THROWS_WITH(parse_function_spec("mono3"), ContainsSubstring("missing ':'"));
    CHECK_THROWS_AS(parse_function_spec(""), parse_error);
    CHECK_THROWS_AS(parse_function_spec("exp:"), parse_error);
    CHECK_THROWS_AS(parse_function_spec("taylor:path"), parse_error);
    CHECK_THROWS_WITH(parse_function_spec("taylor:@" + data_dir + "/missing.txt"), ContainsSubstring("cannot open"));
    CHECK_THROWS_WITH(parse_function_spec("taylor:@" + data_dir + "/bad_token.txt"), ContainsSubstring(":2:"));
    CHECK_THROWS_WITH(parse_function_spec("taylor:@" + data_dir + "/empty.txt"), ContainsSubstring("empty coefficient list"));
}

TEST_CASE("construction invariants")
{
    CHECK_THROWS_AS(EntireFunction::monomial(2, 0.0), domain_fault);
    CHECK_THROWS_AS(EntireFunction::polynomial({}), domain_fault);
    CHECK_THROWS_AS(EntireFunction::polynomial({0.0, 0.0}), domain_fault);
    CHECK_THROWS_AS(EntireFunction::taylor({1.0}, -1.0), domain_fault);
    CHECK_THROWS_AS(EntireFunction::exponential(1.0, 0.0), domain_fault);
    CHECK_THROWS_AS(EntireFunction::monomial(1).scaled(0.0), domain_fault);
}

TEST_CASE("evaluation agrees with the coefficient sum on |z| <= 10")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<complex> c(9);
    for (auto& a : c) a = {u(rng), u(rng)};
    const auto f = EntireFunction::polynomial(c);
    for (int i = 0; i < 500; ++i) {
        const complex z = std::polar(10.0 * std::abs(u(rng)), 4.0 * u(rng));
        complex sum = 0.0;
        double mag = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            sum += c[j] * std::pow(z, int(j));
            mag += std::abs(c[j]) * std::pow(std::abs(z), double(j));
        }
        REQUIRE(std::abs(f(z) - sum) <= 1e-12 * mag);
    }
}

TEST_CASE("jets match finite differences along a ray")
{
    const EntireFunction fs[] = {EntireFunction::monomial(3, complex(1, 2)), EntireFunction::polynomial({1.0, 2.0, complex(0, 1)}),
                                 EntireFunction::exponential(complex(0.5, -1))};
    const complex z(0.7, 0.4);
    const double h = 1e-4;
    for (const auto& f : fs) {
        const auto j = f.jet(z);
        const complex d1 = (f(z + h) - f(z - h)) / (2 * h);
        const complex d2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
        CHECK(std::abs(j.df - d1) < 1e-7 * std::max(1.0, std::abs(j.df)));
        CHECK(std::abs(j.d2f - d2) < 1e-5 * std::max(1.0, std::abs(j.d2f)));
    }
    // z = 0 is safe for every degree
    const auto j0 = EntireFunction::monomial(0).jet(0.0);
    CHECK(j0.f == complex(1.0));
    CHECK(j0.df == complex(0.0));
    const auto j1 = EntireFunction::monomial(1).jet(0.0);
    CHECK(j1.df == complex(1.0));
    CHECK(std::isfinite(std::abs(EntireFunction::monomial(5).jet(0.0).d2f)));
}

TEST_CASE("scaling and rotation act on every variant")
{
    const EntireFunction fs[] = {EntireFunction::monomial(2), EntireFunction::polynomial({1.0, 1.0}),
                                 EntireFunction::taylor({1.0, 0.5, 0.25}, 0.0), EntireFunction::exponential(1.0)};
    const complex c(2, -1);
    const double theta = 0.9;
    const complex z(0.4, 1.1);
    for (const auto& f : fs) {
        CHECK(rel(f.scaled(c)(z), c * f(z)) < 1e-14);
        CHECK(rel(f.rotated(theta)(z), f(std::polar(1.0, theta) * z)) < 1e-14);
    }
}
