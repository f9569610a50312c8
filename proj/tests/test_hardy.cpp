#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lemult/errors.hpp"
#include "lemult/hardy.hpp"
#include "lemult/numdiff.hpp"

using namespace lemult;

TEST_CASE("rho is increasing and vanishes at the horizon")
{
    for (int d : {1, 3}) {
        auto bg = BackgroundParams::make(d, 1.0);
        double last = 0.0;
        for (double g : {1e-300, 1e-100, 1e-10, 1e-3, 0.2, 0.9, 1.0, 1.5, 4.0, 40.0, 4000.0}) {
            const double p = rho(radius_from_gap(bg, g), bg);
            CHECK(p > last);
            last = p;
        }
        CHECK(rho(radius_from_gap(bg, 1e-300), bg) < 2e-3);
        CHECK_THROWS_AS(rho(1.0, bg), DomainError);
    }
}

TEST_CASE("rho' is the derivative of rho, on both sides of the matching point")
{
    for (int d : {1, 2, 5}) {
        auto bg = BackgroundParams::make(d, 1.0);
        for (double r : {1.001, 1.3, 1.999, 2.0, 2.001, 3.0, 25.0}) {
            auto p = [&](double s) { return rho(s, bg); };
            const double fd = numdiff::centred_first(p, r, 1e-4 * (r - 1.0));
            CHECK(rho_prime(radius_at(bg, r), bg) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("rho against a plain trapezoid sum in ln(r - r_s)")
{
    auto bg = BackgroundParams::make(1, 1.0);
    // rho(3) - rho(1 + 1e-8) with the integrand rho' (r - r_s) d ln(r - r_s)
    const double a = std::log(1e-8);
    const double b = std::log(2.0);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = a + (b - a) * i / n;
        const Radius x = radius_from_gap(bg, std::exp(s));
        sum += (i == 0 || i == n ? 0.5 : 1.0) * rho_prime(x, bg) * x.gap;
    }
    sum *= (b - a) / n;
    const double diff = rho(3.0, bg) - rho(radius_from_gap(bg, 1e-8), bg);
    CHECK(diff == doctest::Approx(sum).epsilon(1e-8));
}

TEST_CASE("rho asymptotics")
{
    for (int d : {1, 3}) {
        auto bg = BackgroundParams::make(d, 1.0);
        // rho L -> r_s^{d+1}, rho / r^{d+1} -> 1/(d+1)
        const Radius near = radius_from_gap(bg, 1e-40);
        CHECK(rho(near, bg) * (1.0 - std::log(near.gap / near.r)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rho(1e6, bg) / std::pow(1e6, d + 1) == doctest::Approx(1.0 / (d + 1)).epsilon(1e-4));
        CHECK(rho_weight(near, bg) / near.gap == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rho_weight(radius_at(bg, 1e6), bg) / std::pow(1e6, d + 2) ==
              doctest::Approx(1.0 / ((d + 1.0) * (d + 1.0))).epsilon(1e-4));
    }
}

TEST_CASE("tabulated profile")
{
    auto bg = BackgroundParams::make(2, 1.0);
    const auto g = RadialGrid::uniform_in_log_r(bg, 1.01, 100.0, 64);
    const auto t = tabulate_hardy(bg, g);
    REQUIRE(t.r.size() == 64);
    for (std::size_t i = 1; i < t.r.size(); ++i) {
        CHECK(t.rho[i] > t.rho[i - 1]);
        CHECK(t.hardy_weight[i] == doctest::Approx(t.rho[i] * t.rho[i] / t.rho_prime[i]));
    }
}

TEST_CASE("test functions")
{
    TestFunction phi{3.0, 0.25, 2.0};
    CHECK(phi.value(3.0) == 2.0);
    auto v = [&](double r) { return phi.value(r); };
    CHECK(phi.derivative(3.4) == doctest::Approx(numdiff::centred_first(v, 3.4, 1e-4)).epsilon(1e-8));
    auto bg = BackgroundParams::make(1, 1.0);
    const auto fam = sliding_bumps(bg, 10);
    CHECK(fam.front().center == doctest::Approx(1.1));
    CHECK(fam.back().center == doctest::Approx(50.0));
    const auto j1 = sliding_bumps(bg, 10, 1.1, 50.0, 0.25, 7);
    const auto j2 = sliding_bumps(bg, 10, 1.1, 50.0, 0.25, 7);
    for (std::size_t i = 0; i < j1.size(); ++i) {
        CHECK(j1[i].center == j2[i].center);
    }
    CHECK(j1[4].center != fam[4].center);
    CHECK_THROWS_AS(sliding_bumps(bg, 1), DomainError);
}

TEST_CASE("Hardy ratio")
{
    auto bg = BackgroundParams::make(1, 1.0);
    CHECK(hardy_ratio(TestFunction{3.0, 0.25, 0.0}, bg) == 0.0);
    const TestFunction phi{3.0, 0.25, 1.0};
    const double fine = hardy_ratio(phi, bg, HardyQuadrature{1e-12});
    const double coarse = hardy_ratio(phi, bg, HardyQuadrature{1e-6});
    CHECK(fine > 0.0);
    CHECK(std::isfinite(fine));
    CHECK(coarse == doctest::Approx(fine).epsilon(0.01));
    // the integration-by-parts bound lhs <= 4 int rho^2/rho' (phi')^2 holds for every bump
    for (int d : {1, 3}) {
        auto b = BackgroundParams::make(d, 1.0);
        for (const auto& t : sliding_bumps(b, 12)) {
            const auto h = hardy_integrals(t, b);
            CHECK(h.lhs <= 4.0 * h.rhs_rho);
        }
    }
    CHECK_THROWS_AS(hardy_integrals(TestFunction{0.5, 0.25, 1.0}, bg), DomainError);
}

TEST_CASE("time-boundary coefficient")
{
    for (int d : {1, 3}) {
        auto bg = BackgroundParams::make(d, 1.0);
        auto mp = MultiplierParams::defaults(bg);
        const MultiplierProfile prof(bg, mp);
        CHECK(time_boundary_check(TestFunction{3.0, 0.25, 0.0}, bg, mp) == 0.0);
        // bounded by the envelope, and in fact decaying against it deep in the throat
        double peak = 0.0;
        for (double g = 1e-3; g > 1e-300; g *= 1e-10) {
            const double e = time_coefficient_envelope_ratio(g, bg, prof);
            CHECK(std::isfinite(e));
            peak = std::max(peak, e);
        }
        CHECK(time_coefficient_envelope_ratio(1e-300, bg, prof) < 0.8 * peak);
        // O(r^{-2}) far out
        const double c1 = time_boundary_coefficient(radius_at(bg, 1e3), bg, prof) * 1e6;
        const double c2 = time_boundary_coefficient(radius_at(bg, 1e4), bg, prof) * 1e8;
        CHECK(c2 == doctest::Approx(c1).epsilon(0.05));
        for (const auto& t : sliding_bumps(bg, 8)) {
            const double r = time_boundary_check(t, bg, mp);
            CHECK(r > 0.0);
            CHECK(r < 1e3);
        }
    }
}

TEST_CASE("Hardy scan, d = 1 and 3")
{
    for (int d : {1, 3}) {
        auto bg = BackgroundParams::make(d, 1.0);
        const auto s = hardy_scan(bg, MultiplierParams::defaults(bg));
        CHECK(s.passed);
        CHECK(s.far_spread < 0.02);
        CHECK(s.near_spread < 0.02);
        CHECK(s.ratio_max / s.ratio_min < 10.0);
        CHECK_FALSE(s.blow_up_trend);
    }
    CHECK(has_blow_up_trend({1.0, 2.0, 4.0}));
    CHECK_FALSE(has_blow_up_trend({1.0, 2.0, 2.5}));
}
