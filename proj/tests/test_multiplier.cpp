#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lemult/errors.hpp"
#include "lemult/multiplier.hpp"
#include "lemult/numdiff.hpp"
#include "oracle_values.hpp"

using namespace lemult;

namespace {

struct RegionPoint {
    int d;
    double gap;
    double lf;
};

const RegionPoint kRegionPoints[] = {
    {1, oracle::kGap_case1_d1, oracle::kLf_case1_d1}, {1, oracle::kGap_case2_d1, oracle::kLf_case2_d1},
    {1, oracle::kGap_case3_d1, oracle::kLf_case3_d1}, {1, oracle::kGap_case4_d1, oracle::kLf_case4_d1},
    {3, oracle::kGap_case1_d3, oracle::kLf_case1_d3}, {3, oracle::kGap_case2_d3, oracle::kLf_case2_d3},
    {3, oracle::kGap_case3_d3, oracle::kLf_case3_d3}, {3, oracle::kGap_case4_d3, oracle::kLf_case4_d3},
    {7, oracle::kGap_case1_d7, oracle::kLf_case1_d7}, {7, oracle::kGap_case2_d7, oracle::kLf_case2_d7},
    {7, oracle::kGap_case3_d7, oracle::kLf_case3_d7}, {7, oracle::kGap_case4_d7, oracle::kLf_case4_d7},
};

}  // namespace

TEST_CASE("parameter validation")
{
    auto bg = BackgroundParams::make(1, 1.0);
    auto mp = MultiplierParams::defaults(bg);
    CHECK(mp.alpha == doctest::Approx(4.9));
    CHECK(mp.r_break_low.r > bg.r_s);
    CHECK(mp.r_break_low.r < bg.r_ps);
    CHECK(mp.r_break_high.r > bg.r_ps);
    CHECK_THROWS_AS(MultiplierParams::make(bg, 0.0, 0.1, 0.1), DomainError);
    CHECK_THROWS_AS(MultiplierParams::make(bg, 0.05, 1.5, 0.1), DomainError);
    CHECK_THROWS_AS(MultiplierParams::make(bg, 0.05, 0.1, 1.0), DomainError);
    auto ab = MultiplierParams::with_alpha(bg, 0.05, 0.1, 6.0);
    CHECK(ab.alpha == 6.0);
    CHECK(ab.alpha_override);
}

TEST_CASE("smoothing function a")
{
    auto bg = BackgroundParams::make(1, 1.0);
    auto mp = MultiplierParams::defaults(bg);
    const double xb = mp.x_break_low();
    CHECK(a_eval(0.0, 0, mp) == 0.0);
    CHECK(a_eval(mp.alpha, 0, mp, Side::below) == doctest::Approx(8.0 * mp.alpha / 15.0).epsilon(1e-15));
    CHECK(a_eval(mp.alpha, 0, mp, Side::above) == doctest::Approx(8.0 * mp.alpha / 15.0).epsilon(1e-15));
    CHECK(a_eval(xb, 1, mp, Side::below) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(a_eval(xb, 1, mp, Side::above) == 1.0);
    CHECK(a_eval(xb, 0, mp, Side::below) == doctest::Approx(xb).epsilon(1e-15));
    const double jump = a_eval(xb, 2, mp, Side::below) - a_eval(xb, 2, mp, Side::above);
    CHECK(jump == doctest::Approx(2.0 * mp.delta * mp.eps).epsilon(1e-14));
    CHECK_THROWS_AS(a_eval(xb, 2, mp), DomainError);
    CHECK_THROWS_AS(a_eval(0.0, 3, mp), DomainError);
    CHECK_THROWS_AS(a_eval(1.0, 4, mp), DomainError);
    CHECK_THROWS_AS(a_eval(1.0, -1, mp), DomainError);

    // bounds
    for (double x = -200.0; x <= 20.0; x += 0.37) {
        CHECK(a_eval(x, 0, mp) <= 8.0 * mp.alpha / 15.0 + 1e-15);
        if (x < mp.alpha) {
            CHECK(a_eval(x, 0, mp) < 8.0 * mp.alpha / 15.0);
        }
        if (x <= xb) {
            CHECK(a_eval(x, 0, mp) <= xb);
        }
    }

    // derivatives of each piece against differences
    for (double x : {-60.0, -25.0, -5.0, 1.0, 3.3, 8.0}) {
        for (int k = 1; k <= 3; ++k) {
            auto lower = [&](double s) { return a_eval(s, k - 1, mp, Side::none); };
            const double fd = numdiff::centred_first(lower, x, 1e-3);
            CHECK(std::abs(a_eval(x, k, mp) - fd) <= 1e-8 * (1e-4 + std::abs(fd)));
        }
    }
}

TEST_CASE("g and f at r = 2")
{
    auto bg = BackgroundParams::make(1, 1.0);
    auto mp = MultiplierParams::defaults(bg);
    MultiplierProfile prof(bg, mp);
    CHECK(g_eval(2.0, bg) == doctest::Approx((8.0 - 2.0 * std::sqrt(2.0)) / 8.0).epsilon(1e-15));
    CHECK(g_eval(bg.r_ps, bg) == doctest::Approx(0.0).scale(1e-15));
    CHECK(g_eval(1e8, bg) == doctest::Approx(1.0));
    CHECK_THROWS_AS(g_eval(0.9, bg), DomainError);

    const double f2 = prof.f(2.0);
    CHECK(f2 == doctest::Approx(oracle::kF_d1_r2).epsilon(1e-12));
    // second arithmetic path
    const double al = mp.alpha;
    const double x = std::log(3.0);
    const double a = x - 2.0 * x * x * x / (3.0 * al * al) + std::pow(x, 5) / (5.0 * std::pow(al, 4));
    const double alt = (8.0 - 2.0 * std::sqrt(2.0)) / 8.0 + 0.75 * (std::sqrt(2.0) / 8.0) * a;
    CHECK(std::abs(f2 - alt) < 1e-12);
    CHECK(prof.f_prime(2.0) == doctest::Approx(oracle::kFprime_d1_r2).epsilon(1e-12));
    CHECK(std::abs(prof.f(bg.r_ps)) < 1e-15);
    CHECK(prof.f(1e6) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("f' against centred differences")
{
    for (int d = 1; d <= 7; ++d) {
        auto bg = BackgroundParams::make(d, 1.0);
        MultiplierProfile prof(bg, MultiplierParams::defaults(bg));
        for (double h : {-30.0, -12.0, -3.0, 1.0, 4.0, 7.0, 12.0}) {
            const Radius x = r_of_theta(h, bg);
            // differentiate in ln(gap) to keep the stencil outside the horizon
            auto fs = [&](double s) { return prof.f(radius_from_gap(bg, std::exp(s))); };
            const double fd = numdiff::centred_first(fs, std::log(x.gap), 0.01) / x.gap;
            CHECK(prof.f_prime(x) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("l(g) closed form")
{
    auto bg = BackgroundParams::make(1, 1.0);
    const Radius x = radius_at(bg, 2.0);
    CHECK(std::abs(l_of_g(x, bg) - 69.0 / 512.0) < 1e-15);
    const double fd = l_operator_oracle([&](const Radius& p) { return g_eval(p, bg); }, x, bg);
    CHECK(std::abs(fd - 69.0 / 512.0) < 1e-9);
    // zero function, and w = r^{-(d+2)} for which w r^{d+2} is constant
    CHECK(l_operator_oracle([](const Radius&) { return 0.0; }, x, bg) == 0.0);
    CHECK(std::abs(l_operator_oracle([](const Radius& p) { return std::pow(p.r, -3); }, x, bg)) < 1e-12);
    CHECK(std::abs(l_of_h_term(radius_at(bg, bg.r_ps), bg)) < 1e-14);
}

TEST_CASE("l(f) closed form against frozen values and the oracle")
{
    for (const auto& pt : kRegionPoints) {
        auto bg = BackgroundParams::make(pt.d, 1.0);
        MultiplierProfile prof(bg, MultiplierParams::defaults(bg));
        const Radius x = radius_from_gap(bg, pt.gap);
        INFO("d=" << pt.d << " gap=" << pt.gap);
        CHECK(prof.l_f_closed(x) == doctest::Approx(pt.lf).epsilon(1e-10));
        const APiece piece = prof.piece(x);
        CHECK(prof.oracle_interior(x));
        const double fd =
            l_operator_oracle([&](long double gap) { return prof.f_on_piece_extended(gap, piece); }, x, bg);
        CHECK(fd == doctest::Approx(pt.lf).epsilon(1e-6));
    }
    auto bg = BackgroundParams::make(1, 1.0);
    MultiplierProfile prof(bg, MultiplierParams::defaults(bg));
    CHECK(prof.l_f_closed(1e3) == doctest::Approx(l_of_g(radius_at(bg, 1e3), bg)).epsilon(1e-15));
    CHECK_THROWS_AS(prof.l_f_closed(prof.params().r_break_low), DomainError);
    CHECK(prof.l_f_closed(prof.params().r_break_low, Side::below) !=
          prof.l_f_closed(prof.params().r_break_low, Side::above));
}

TEST_CASE("oracle in double precision")
{
    // fine away from the horizon; the extended overload covers the rest
    auto bg = BackgroundParams::make(2, 1.0);
    MultiplierProfile prof(bg, MultiplierParams::defaults(bg));
    for (double r : {1.6, 3.0, 12.0}) {
        const Radius x = radius_at(bg, r);
        const APiece piece = prof.piece(x);
        const double fd = l_operator_oracle([&](const Radius& p) { return prof.f_on_piece(p, piece); }, x, bg);
        CHECK(fd == doctest::Approx(prof.l_f_closed(x)).epsilon(1e-6));
        const double ext =
            l_operator_oracle([&](long double gap) { return prof.f_on_piece_extended(gap, piece); }, x, bg);
        CHECK(ext == doctest::Approx(prof.l_f_closed(x)).epsilon(1e-7));
    }
    CHECK_THROWS_AS(l_operator_oracle([](const Radius&) { return 1.0; }, Radius{1.0, 0.0}, bg), DomainError);
    CHECK_THROWS_AS(l_operator_oracle([](const Radius&) { return 1.0; }, radius_from_gap(bg, 1e-300), bg),
                    NumericalError);
    OracleOptions bad;
    bad.log_step = -1.0;
    CHECK_THROWS_AS(l_operator_oracle([](const Radius&) { return 1.0; }, radius_at(bg, 2.0), bg, bad),
                    NumericalError);
}

TEST_CASE("continuity at the breakpoints")
{
    for (int d = 1; d <= 7; ++d) {
        auto bg = BackgroundParams::make(d, 1.0);
        MultiplierProfile prof(bg, MultiplierParams::defaults(bg));
        const auto& mp = prof.params();
        const std::pair<Radius, std::pair<APiece, APiece>> breaks[] = {
            {mp.r_break_low, {APiece::horizon, APiece::identity}},
            {r_of_theta(0.0, bg), {APiece::identity, APiece::quintic}},
            {mp.r_break_high, {APiece::quintic, APiece::plateau}},
        };
        for (const auto& [x, pieces] : breaks) {
            const double fl = prof.f_on_piece(x, pieces.first);
            const double fr = prof.f_on_piece(x, pieces.second);
            CHECK(std::abs(fl - fr) <= 1e-10 * (1.0 + std::abs(fl)));
            const double dl = prof.f_prime_on_piece(x, pieces.first);
            const double dr = prof.f_prime_on_piece(x, pieces.second);
            CHECK(std::abs(dl - dr) <= 1e-10 * (1.0 + std::abs(dl)));
        }
    }
}

TEST_CASE("f'' jump")
{
    const std::pair<int, double> cases[] = {{1, oracle::kF2Jump_d1}, {3, oracle::kF2Jump_d3}};
    for (const auto& [d, expect] : cases) {
        auto bg = BackgroundParams::make(d, 1.0);
        MultiplierProfile prof(bg, MultiplierParams::defaults(bg));
        CHECK(prof.f_second_jump() == doctest::Approx(expect).epsilon(1e-9));
        CHECK(prof.f_second_jump() > 0.0);
    }
    // linear in delta
    auto bg = BackgroundParams::make(1, 1.0);
    MultiplierProfile a(bg, MultiplierParams::make(bg, 0.05, 1e-3, 0.1));
    MultiplierProfile b(bg, MultiplierParams::make(bg, 0.05, 1e-6, 0.1));
    CHECK(b.f_second_jump() == doctest::Approx(a.f_second_jump() * 1e-3).epsilon(1e-12));
}

TEST_CASE("f'' jump against one-sided differences of f")
{
    for (int d = 1; d <= 7; ++d) {
        auto bg = BackgroundParams::make(d, 1.0);
        MultiplierProfile prof(bg, MultiplierParams::defaults(bg));
        const double sb = std::log(prof.params().r_break_low.gap);
        auto fs = [&](double s) { return prof.f(radius_from_gap(bg, std::exp(s))); };
        // f'' = e^{-2s}(f_ss - f_s) with s = ln(r - r_s)
        auto second = [&](int dir) {
            const double step = 0.02;
            return numdiff::one_sided_second(fs, sb, step, dir) - numdiff::one_sided_first(fs, sb, step, dir);
        };
        const double fd = std::exp(-2.0 * sb) * (second(-1) - second(+1));
        INFO("d=" << d);
        CHECK(fd == doctest::Approx(prof.f_second_jump()).epsilon(1e-4));
    }
}
