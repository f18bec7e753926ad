#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include <gmeans/errors.hpp>
#include <gmeans/special_fn.hpp>

#include "oracles.hpp"

using namespace gmeans;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double e = std::numbers::e;
}

TEST_CASE("phi at reference points")
{
    const auto z = phi(0.0, 0.5);
    CHECK(z.phi == 0.5);
    CHECK(z.dphi == 1.0);

    const auto a = phi(1.0, 1.0);
    CHECK_THAT(a.phi, WithinRel(1.0 - 1.0 / e, 1e-15));
    CHECK_THAT(a.dphi, WithinRel(1.0 / e, 1e-15));
    CHECK_THAT(a.phi, WithinAbs(0.6321206, 5e-8));

    const auto b = phi(-1.0, 1.0);
    CHECK_THAT(b.phi, WithinRel(e - 1.0, 1e-15));
    CHECK_THAT(b.dphi, WithinRel(e, 1e-15));
}

TEST_CASE("phi matches a 50-digit evaluation on both sides of the series cutoff")
{
    for (double alpha : {-4.0, -1.0, -1e-3, 1e-3, 1.0, 4.0}) {
        for (double x : {1e-12, 5e-9, 2e-8, 1e-4, 0.3, 2.0, 20.0}) {
            CAPTURE(alpha, x);
            CHECK_THAT(phi(alpha, x).phi, WithinRel(oracle::phi_big(alpha, x), 2e-15));
        }
    }
}

TEST_CASE("phi rejects negative x and non-finite alpha")
{
    CHECK_THROWS_AS(phi(1.0, -1e-3), domain_fault);
    CHECK_THROWS_AS(phi(std::nan(""), 1.0), domain_fault);
    CHECK_THROWS_AS(phi(INFINITY, 1.0), domain_fault);
}

TEST_CASE("phi' = 1 - alpha phi over alpha in [-4, 4], x in (0, 20]")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> da(-4.0, 4.0);
    std::uniform_real_distribution<double> dl(std::log(1e-6), std::log(20.0));
    for (int i = 0; i < 20000; ++i) {
        const double alpha = da(rng);
        const double x = std::exp(dl(rng));
        const auto [f, df] = phi(alpha, x);
        const double scale = std::max({std::abs(df), 1.0, std::abs(alpha * f)});
        REQUIRE(std::abs(df - (1.0 - alpha * f)) <= 1e-12 * scale);
        REQUIRE(df > 0.0);
    }
}

TEST_CASE("aux_g reference values")
{
    const auto z = aux_g(1.0, 0.0);
    CHECK(z.g1 == 0.0);
    CHECK(z.g2 == 0.0);
    CHECK(z.g3 == 0.0);

    const auto a = aux_g(1.0, 1.0);
    CHECK_THAT(a.g1, WithinAbs(-0.6321206, 5e-8));
    // g2 = phi^2 - 4 phi + 2 with phi = 1 - 1/e
    CHECK_THAT(a.g2, WithinRel(-0.12890583442050266, 1e-13));
    CHECK_THAT(a.g3, WithinAbs(-0.2642411, 5e-8));

    CHECK(aux_g(-1.0, 1.0).g3 == 1.0);
}

TEST_CASE("aux_g signs by the sign of alpha")
{
    for (double alpha : {-3.0, -1.0, -0.2, 0.0, 0.2, 1.0, 3.0}) {
        for (double x = 1e-3; x <= 20.0; x *= 1.1) {
            const auto [g1, g2, g3] = aux_g(alpha, x);
            const double f = phi(alpha, x).phi;
            const double band = 1e-9 * (1.0 + x * x * std::abs(alpha) + x + f * f);
            CAPTURE(alpha, x, g1, g2, g3);
            if (alpha >= 0.0) {
                CHECK(g1 <= band);
                CHECK(g3 <= band);
                CHECK(f - x <= band);
            }
            if (alpha <= 0.0) {
                CHECK(g3 >= -band);
                CHECK(f - x >= -band);
            }
            CHECK(g2 <= band);
        }
    }
}

TEST_CASE("aux_abcs reference values")
{
    // Reference from a 40-digit evaluation of the defining formulas.
    const auto b = aux_abcs(1.0, 1.0, 1.0);
    CHECK_THAT(b.A, WithinRel(-0.9206735942077923, 1e-13));
    CHECK(b.B == 1.0);
    CHECK_THAT(b.C, WithinRel(1.0 / e, 1e-15));
    CHECK_THAT(b.S, WithinRel(1.5345317036001125, 1e-13));

    const auto c = aux_abcs(-1.0, 1.0, 0.0);
    CHECK_THAT(c.S, WithinRel(1.1639534137386528, 1e-13));
    CHECK_THAT(c.S, WithinRel(std::abs(2.0 / c.phi - 1.0 - c.alpha * c.x), 1e-13));

    for (double alpha : {-3.0, 0.0, 2.0}) {
        const auto s = aux_abcs(alpha, 1e-10, 0.0);
        CHECK_THAT(s.B, WithinAbs(1.0, 1e-9));
        CHECK_THAT(s.C, WithinAbs(0.0, 1e-9));
        CHECK_THAT(s.S, WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("aux_abcs preconditions")
{
    CHECK_THROWS_AS(aux_abcs(1.0, 0.0, 1.0), domain_fault);
    CHECK_THROWS_AS(aux_abcs(1.0, 1.0, -0.5), domain_fault);
}

TEST_CASE("discriminant identity and S relations")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> da(-4.0, 4.0);
    std::uniform_real_distribution<double> dl(std::log(1e-3), std::log(20.0));
    std::uniform_real_distribution<double> dy(0.0, 10.0);
    for (int i = 0; i < 5000; ++i) {
        const double alpha = da(rng);
        const double x = std::exp(dl(rng));
        const double y = dy(rng);
        const auto b0 = aux_abcs(alpha, x, 0.0);
        const auto b = aux_abcs(alpha, x, y);
        CAPTURE(alpha, x, y);

        const double lhs = (1 - alpha * x) * (1 - alpha * x) - 4 * x * b0.dphi * (b0.phi - x) / (b0.phi * b0.phi);
        const double sq = (2 * x - (1 + alpha * x) * b0.phi) / b0.phi;
        const double scale = std::max({(1 - alpha * x) * (1 - alpha * x), std::abs(lhs - sq * sq) , sq * sq,
                                       std::abs(4 * x * b0.dphi * (b0.phi - x) / (b0.phi * b0.phi))});
        REQUIRE(std::abs(lhs - sq * sq) <= 1e-10 * scale);

        REQUIRE(std::abs(b.B * b.B - b.S * b.S - 4 * b.A * b.C) <= 1e-10 * (b.B * b.B + std::abs(4 * b.A * b.C)));
        if (y > 0.0) {
            REQUIRE(b.S > 0.0);
            // S(y)^2 - S(0)^2 = y (2 B(0) + y), so growth needs B(0) > -y/2.
            if (b0.B >= 0.0) REQUIRE(b.S > b0.S);
        }
    }
}

TEST_CASE("S is increasing in y when B > 0")
{
    for (double alpha : {-2.0, -0.5, 0.5, 2.0}) {
        for (double x : {0.05, 0.7, 3.0}) {
            double previous = -1.0;
            for (double y = 0.0; y <= 8.0; y += 0.25) {
                const auto b = aux_abcs(alpha, x, y);
                if (b.B <= 0.0) continue;
                CHECK(b.S > previous);
                previous = b.S;
            }
        }
    }
}

TEST_CASE("t0 agrees with an independent bisection")
{
    const double ref = oracle::bisect([](double t) { return std::exp(t) - 1 - t - t * t; }, 1.79, 1.80);
    const auto coarse = solve_t0(1e-2);
    CHECK(std::floor(coarse.value * 100.0) / 100.0 == 1.79);
    CHECK(std::abs(u_t0(coarse.value)) <= 1e-2);

    const auto fine = solve_t0(1e-12);
    CHECK(std::abs(fine.residual) <= 1e-12);
    CHECK_THAT(fine.value, WithinAbs(ref, 1e-10));
    CHECK_THAT(fine.value, WithinAbs(1.7932821329007610, 1e-13));
    CHECK_THAT(t0(), WithinAbs(1.7932821329007610, 1e-14));
}

TEST_CASE("t0 does not depend on the starting bracket")
{
    const double ref = solve_t0(1e-13).value;
    for (auto [lo, hi] : {std::pair{0.5, 5.0}, {1.0, 2.0}, {1.5, 4.0}, {0.5, 1.9}, {1.7, 5.0}}) {
        CAPTURE(lo, hi);
        CHECK_THAT(solve_t0(1e-13, lo, hi).value, WithinAbs(ref, 1e-12));
    }
}

TEST_CASE("solve_t0 rejects bad brackets and exhausted iteration caps")
{
    CHECK_THROWS_AS(solve_t0(0.0), domain_fault);
    CHECK_THROWS_AS(solve_t0(1e-8, 2.0, 3.0), domain_fault);
    CHECK_THROWS_AS(solve_t0(1e-12, 1.0, 3.0, 2), convergence_failure);
}

TEST_CASE("u changes sign only at t0")
{
    const double t = t0();
    for (double s = 0.01; s < t - 1e-6; s += 0.01) CHECK(u_t0(s) < 0.0);
    for (double s = t + 1e-3; s < 10.0; s += 0.05) CHECK(u_t0(s) > 0.0);
}

TEST_CASE("x0 and g1 root")
{
    CHECK_THAT(x0_of_alpha(-1.0), WithinAbs(1.7933, 5e-5));
    CHECK_THAT(x0_of_alpha(-2.0), WithinRel(0.8966410664503805, 1e-14));
    CHECK_THROWS_AS(x0_of_alpha(0.5), domain_fault);
    CHECK_THROWS_AS(x0_of_alpha(0.0), domain_fault);

    for (double alpha : {-4.0, -1.0, -0.25}) {
        const double x0 = x0_of_alpha(alpha);
        CHECK(std::abs(aux_g(alpha, x0).g1) <= 1e-12 * (1.0 + x0 * x0 * -alpha));
        CHECK(aux_g(alpha, 0.5 * x0).g1 > 0.0);
        CHECK(aux_g(alpha, 2.0 * x0).g1 < 0.0);
    }
}

TEST_CASE("lower incomplete gamma reference values")
{
    CHECK_THAT(lower_incomplete_gamma(1.0, 1.0), WithinRel(1.0 - 1.0 / e, 1e-14));
    CHECK(lower_incomplete_gamma(2.0, 0.0) == 0.0);
    CHECK_THAT(lower_incomplete_gamma(2.0, 1.0), WithinRel(1.0 - 2.0 / e, 1e-14));
}

TEST_CASE("lower incomplete gamma against Boost.Math")
{
    for (double s : {0.5, 1.0, 1.5, 2.0, 3.5, 7.0, 13.0}) {
        for (double z : {1e-6, 0.1, 0.9, 2.0, 5.0, 12.0, 40.0, 200.0}) {
            CAPTURE(s, z);
            CHECK_THAT(lower_incomplete_gamma(s, z), WithinRel(boost::math::tgamma_lower(s, z), 1e-12));
        }
    }
}

TEST_CASE("lower incomplete gamma guards")
{
    CHECK_THROWS_AS(lower_incomplete_gamma(0.0, 1.0), domain_fault);
    CHECK_THROWS_AS(lower_incomplete_gamma(1.0, -1.0), domain_fault);
    CHECK_THROWS_AS(lower_incomplete_gamma(300.0, 1e4), saturation);
}
