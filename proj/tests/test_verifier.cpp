#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lemult/errors.hpp"
#include "lemult/numdiff.hpp"
#include "lemult/verifier.hpp"
#include "oracle_values.hpp"

using namespace lemult;

namespace {

BackgroundParams bg_of(int d)
{
    return BackgroundParams::make(d, 1.0);
}

}  // namespace

TEST_CASE("case names round-trip")
{
    for (CaseId id : scan_cases()) {
        CHECK(case_from_string(to_string(id)) == id);
    }
    CHECK(case_from_string("budget") == CaseId::budget);
    CHECK_FALSE(case_from_string("case5").has_value());
}

TEST_CASE("Case-3 split at r = 2, d = 1")
{
    auto bg = bg_of(1);
    auto mp = MultiplierParams::defaults(bg);
    const Radius x = radius_at(bg, 2.0);
    const auto c = case3_polynomials(x, bg, mp);
    CHECK(c.p == doctest::Approx(oracle::kP_d1_r2).epsilon(1e-14));
    CHECK(c.n1 == doctest::Approx(oracle::kN1_d1_r2).epsilon(1e-13));
    CHECK(c.n2 == doctest::Approx(oracle::kN2_d1_r2).epsilon(1e-13));
    CHECK(c.n3 == doctest::Approx(oracle::kN3_d1_r2).epsilon(1e-13));
    const double sum = 3.0 / (4.0 * std::pow(2.0, 8)) * (c.p + c.n1 + c.n2 + c.n3);
    CHECK(sum == doctest::Approx(oracle::kLfCase3Oracle_d1_r2).epsilon(1e-13));
    const MultiplierProfile prof(bg, mp);
    CHECK(prof.l_f_closed(x) == doctest::Approx(sum).epsilon(1e-12));
    CHECK_THROWS_AS(case3_polynomials(radius_at(bg, 1.2), bg, mp), DomainError);
}

TEST_CASE("split identity holds across Case 3 for every d")
{
    for (int d = 1; d <= 7; ++d) {
        auto bg = bg_of(d);
        auto mp = MultiplierParams::defaults(bg);
        const MultiplierProfile prof(bg, mp);
        for (double h = 0.05; h < mp.alpha; h += 0.37) {
            const Radius x = r_of_theta(h, bg);
            const auto c = case3_polynomials(x, bg, mp);
            const double sum = (d + 2) / (4.0 * std::pow(x.r, 2 * d + 6)) * (c.p + c.n1 + c.n2 + c.n3);
            CHECK(sum == doctest::Approx(prof.l_f_closed(x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("q and s")
{
    for (int d = 1; d <= 7; ++d) {
        CHECK(q_eval(0.0, d, 4.9) == d / 4.0 + 0.5);
        for (double x = 0.0; x <= 4.9; x += 0.35) {
            const double xc = std::clamp(x, 0.01, 4.89);
            auto q = [&](double t) { return q_eval(t, d, 4.9); };
            auto s = [&](double t) { return s_eval(t, d, 4.9); };
            CHECK(q_prime(xc, d, 4.9) == doctest::Approx(numdiff::centred_first(q, xc, 1e-3)).epsilon(1e-8));
            CHECK(s_prime(xc, d, 4.9) == doctest::Approx(numdiff::centred_first(s, xc, 1e-3)).epsilon(1e-8));
            CHECK(s_prime(xc, d, 4.9) >= s_prime_lower_bound(xc, d, 4.9));
        }
        for (double x = 0.0; x <= 5.0; x += 0.25) {
            CHECK(s_prime_bound_alpha5(x, d) == doctest::Approx(s_prime_lower_bound(x, d, 5.0)).epsilon(1e-12));
            CHECK(q_prime(x, d, 5.0) >= q_prime_lower_bound_alpha5(x, d) - 1e-12);
        }
    }
    // bracket of the alpha = 5 bound at d = 1, x = 0
    CHECK(s_prime_bound_alpha5(0.0, 1) * 1250.0 * 4.0 == doctest::Approx(8656.0).epsilon(1e-14));
    CHECK(s_eval(0.0, 1, 4.9) == doctest::Approx(oracle::kS0_d1).epsilon(1e-14));
    CHECK_THROWS_AS(q_eval(-0.1, 1, 4.9), DomainError);
    CHECK_THROWS_AS(s_prime(5.5, 1, 4.9), DomainError);
}

TEST_CASE("all scans pass at the default parameters")
{
    for (int d = 1; d <= 7; ++d) {
        auto bg = bg_of(d);
        auto mp = MultiplierParams::defaults(bg);
        for (CaseId id : scan_cases()) {
            const auto v = verify_case(id, bg, mp, grid_for_case(id, bg, mp, 512), ScanOptions{1, false});
            INFO("d = ", d, ", ", to_string(id), ": ", v.detail, " min ", v.min_margin);
            CHECK(v.passed);
            CHECK(v.grid_size > 512);
        }
    }
}

TEST_CASE("alpha = 6 breaks Case 4 at low d")
{
    for (int d : {1, 2}) {
        auto bg = bg_of(d);
        auto mp = MultiplierParams::with_alpha(bg, 0.05, 0.1, 6.0);
        const auto v = verify_case(CaseId::case4_fprime, bg, mp, grid_for_case(CaseId::case4_fprime, bg, mp, 256));
        CHECK_FALSE(v.passed);
        CHECK(v.min_margin < 0.0);
        CHECK(v.witness_r >= mp.r_break_high.r);
    }
    // the threshold 15/16 (d+3)^2/(d+2) exceeds 6 from d = 3 on
    auto bg = bg_of(3);
    auto mp = MultiplierParams::with_alpha(bg, 0.05, 0.1, 6.0);
    CHECK(verify_case(CaseId::case4_fprime, bg, mp, grid_for_case(CaseId::case4_fprime, bg, mp, 256)).passed);
}

TEST_CASE("scan errors")
{
    auto bg = bg_of(1);
    auto mp = MultiplierParams::defaults(bg);
    CHECK_THROWS_AS(verify_case(CaseId::case1, bg, mp, region_grid(Region::case3, bg, mp, 64)), DomainError);
    CHECK_THROWS_AS(verify_case(CaseId::case4_lf, bg, mp, region_grid(Region::case2, bg, mp, 64)), DomainError);
    CHECK_THROWS_AS(verify_budget(bg, mp, region_grid(Region::case2, bg, mp, 64)), DomainError);
}

TEST_CASE("refinement adds points where the margin is smallest")
{
    auto bg = bg_of(2);
    auto mp = MultiplierParams::defaults(bg);
    const auto g = grid_for_case(CaseId::case2, bg, mp, 200);
    const auto v0 = verify_case(CaseId::case2, bg, mp, g);
    const auto v2 = verify_case(CaseId::case2, bg, mp, g, ScanOptions{2, true});
    CHECK(v2.grid_size > v0.grid_size);
    CHECK(v2.samples.size() == v2.grid_size);
    CHECK(v2.min_margin <= v0.min_margin);
    for (std::size_t i = 1; i < v2.samples.size(); ++i) {
        CHECK(v2.samples[i].r >= v2.samples[i - 1].r);
    }
}

TEST_CASE("budget")
{
    for (int d : {1, 3, 7}) {
        auto bg = bg_of(d);
        auto mp = MultiplierParams::defaults(bg);
        const auto v = verify_budget(bg, mp, exterior_grid(bg, mp, 512));
        INFO("d = ", d, ": ", v.detail);
        CHECK(v.passed);
        REQUIRE(v.sub_margins.size() == 3);
        for (const auto& [name, m] : v.sub_margins) {
            CHECK(m > 0.0);
        }
    }
    // eps = 0.5 starves the a''' term
    auto bg = bg_of(1);
    auto mp = MultiplierParams::make(bg, 0.5, 0.1, 0.1);
    const auto bad = verify_budget(bg, mp, exterior_grid(bg, mp, 512));
    CHECK_FALSE(bad.passed);
    CHECK(bad.sub_margins[1].second < 0.0);

    // margin (iii) shrinks as delta grows
    double last = 2.0;
    for (double delta : {0.02, 0.05, 0.1, 0.2, 0.4}) {
        auto m = MultiplierParams::make(bg, 0.05, delta, 0.1);
        const auto v = verify_budget(bg, m, exterior_grid(bg, m, 512));
        const double iii = v.sub_margins[2].second;
        CHECK(iii < last);
        last = iii;
    }
}

TEST_CASE("cutoff")
{
    auto bg = bg_of(1);
    const double lo = r_of_theta(-1.0, bg).r;
    CHECK(budget_cutoff(lo * 0.999 + 0.001, bg) == 1.0);
    CHECK(budget_cutoff(bg.r_ps, bg) == 0.0);
    const double mid = 0.5 * (lo + bg.r_ps);
    CHECK(budget_cutoff(mid, bg) == doctest::Approx(0.5));
    auto b = [&](double r) { return budget_cutoff(r, bg); };
    CHECK(budget_cutoff_prime(mid, bg) == doctest::Approx(numdiff::centred_first(b, mid, 1e-5)).epsilon(1e-8));
}
