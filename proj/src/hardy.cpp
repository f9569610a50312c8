#include "lemult/hardy.hpp"

#include <random>
#include <sstream>

#include "lemult/errors.hpp"
#include "lemult/quadrature.hpp"

namespace lemult {

namespace {

// near-horizon point parametrised by v = 1/(1 - log y)
struct VPoint {
    double x;
    double gap;
    double jac;  // d rho / d v = x^d r_s / (1 - y)^2
};

VPoint at_v(double v, const BackgroundParams& bg)
{
    const double log_y = 1.0 - 1.0 / v;
    const double y = std::exp(log_y);
    const double one_minus_y = -std::expm1(log_y);
    const double x = bg.r_s / one_minus_y;
    return {x, bg.r_s * y / one_minus_y, std::pow(x, bg.d) * bg.r_s / (one_minus_y * one_minus_y)};
}

double v_of(const Radius& x)
{
    return 1.0 / (1.0 - (std::log(x.gap) - std::log(x.r)));
}

QuadratureOptions qopt(double rel)
{
    QuadratureOptions o;
    o.rel_tol = rel;
    o.abs_tol = 1e-250;
    return o;
}

// the matching point between the v and log-r parametrisations
double r_match(const BackgroundParams& bg)
{
    return 2.0 * bg.r_s;
}

double rho_near_end(const BackgroundParams& bg)
{
    const Radius m = radius_from_gap(bg, bg.r_s);
    return integrate([&](double v) { return at_v(v, bg).jac; }, 0.0, v_of(m), qopt(1e-13));
}

// support of a test function, where it exceeds e^{-40} of its peak
struct Support {
    double lo;
    double hi;
};

Support support_of(const TestFunction& phi, const BackgroundParams& bg)
{
    const double k = 9.0 * phi.width;
    return {std::max(bg.r_s, phi.center * std::exp(-k)), phi.center * std::exp(k)};
}

// int g(r) d rho over the support
template <class G>
double integrate_d_rho(G&& g, const Support& s, const BackgroundParams& bg, double rel)
{
    const double rm = r_match(bg);
    double total = 0.0;
    if (s.lo < rm) {
        const double v_lo = s.lo <= bg.r_s ? 0.0 : v_of(radius_at(bg, s.lo));
        const double v_hi = v_of(radius_at(bg, std::min(s.hi, rm)));
        total += integrate(
            [&](double v) {
                const VPoint p = at_v(v, bg);
                return p.jac * g(Radius{p.x, p.gap});
            },
            v_lo, v_hi, qopt(rel));
    }
    if (s.hi > rm) {
        total += integrate(
            [&](double lr) {
                const Radius x = radius_at(bg, std::exp(lr));
                return rho_prime(x, bg) * x.r * g(x);
            },
            std::log(std::max(s.lo, rm)), std::log(s.hi), qopt(rel));
    }
    return total;
}

// int g(r) dr over the support; ln(r - r_s) below 2 r_s, ln r above.
// `floor_gap` bounds the near-horizon end (integrands vanish there).
template <class G>
double integrate_dr(G&& g, const Support& s, const BackgroundParams& bg, double rel, double floor_gap,
                    const std::vector<double>& split_gaps = {})
{
    const double rm = r_match(bg);
    double total = 0.0;
    if (s.lo < rm) {
        const double a = s.lo <= bg.r_s ? std::log(floor_gap) : std::log(s.lo - bg.r_s);
        const double b = std::log(std::min(s.hi, rm) - bg.r_s);
        std::vector<double> cuts{a};
        for (double gsplit : split_gaps) {
            const double c = std::log(gsplit);
            if (c > a && c < b) {
                cuts.push_back(c);
            }
        }
        cuts.push_back(b);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            total += integrate(
                [&](double sg) {
                    const Radius x = radius_from_gap(bg, std::exp(sg));
                    return g(x) * x.gap;
                },
                cuts[i], cuts[i + 1], qopt(rel));
        }
    }
    if (s.hi > rm) {
        total += integrate(
            [&](double lr) {
                const Radius x = radius_at(bg, std::exp(lr));
                return g(x) * x.r;
            },
            std::log(std::max(s.lo, rm)), std::log(s.hi), qopt(rel));
    }
    return total;
}

}  // namespace

double rho(const Radius& x, const BackgroundParams& bg)
{
    if (!(x.gap > 0.0)) {
        throw DomainError("rho: r must exceed r_s");
    }
    const double rm = r_match(bg);
    if (x.r <= rm) {
        return integrate([&](double v) { return at_v(v, bg).jac; }, 0.0, v_of(x), qopt(1e-13));
    }
    return rho_near_end(bg) + integrate(
                                  [&](double lr) {
                                      const Radius s = radius_at(bg, std::exp(lr));
                                      return rho_prime(s, bg) * s.r;
                                  },
                                  std::log(rm), std::log(x.r), qopt(1e-13));
}

double rho(double r, const BackgroundParams& bg)
{
    return rho(radius_at(bg, r), bg);
}

double rho_prime(const Radius& x, const BackgroundParams& bg)
{
    if (!(x.gap > 0.0)) {
        throw DomainError("rho': r must exceed r_s");
    }
    const double log_y = std::log(x.gap) - std::log(x.r);
    const double L = 1.0 - log_y;
    return std::pow(x.r, bg.d) / (L * L * std::exp(log_y));
}

double rho_weight(const Radius& x, const BackgroundParams& bg)
{
    const double p = rho(x, bg);
    return p * p / rho_prime(x, bg);
}

HardyProfile tabulate_hardy(const BackgroundParams& bg, const RadialGrid& grid)
{
    HardyProfile out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Radius x = grid.radius(i);
        const double p = rho(x, bg);
        const double pp = rho_prime(x, bg);
        out.r.push_back(x.r);
        out.rho.push_back(p);
        out.rho_prime.push_back(pp);
        out.hardy_weight.push_back(p * p / pp);
    }
    return out;
}

double TestFunction::value(double r) const
{
    const double z = std::log(r / center) / width;
    return amplitude * std::exp(-0.5 * z * z);
}

double TestFunction::derivative(double r) const
{
    const double z = std::log(r / center) / width;
    return -value(r) * z / (width * r);
}

std::vector<TestFunction> sliding_bumps(const BackgroundParams& bg, std::size_t count, double lo_over_rs,
                                        double hi_over_rs, double width, std::uint64_t seed)
{
    if (count < 2 || !(lo_over_rs > 1.0) || !(hi_over_rs > lo_over_rs) || !(width > 0.0)) {
        throw DomainError("sliding_bumps: need count >= 2, 1 < lo < hi, width > 0");
    }
    std::vector<TestFunction> out;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    const double a = std::log(lo_over_rs);
    const double b = std::log(hi_over_rs);
    const double cell = (b - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        double c = a + cell * static_cast<double>(i);
        if (seed != 0 && i > 0 && i + 1 < count) {
            c += cell * jitter(gen);
        }
        out.push_back(TestFunction{bg.r_s * std::exp(c), width, 1.0});
    }
    return out;
}

HardyIntegrals hardy_integrals(const TestFunction& phi, const BackgroundParams& bg, const HardyQuadrature& q)
{
    HardyIntegrals out;
    if (phi.is_zero()) {
        return out;
    }
    if (!(phi.center > bg.r_s) || !(phi.width > 0.0)) {
        throw DomainError("hardy_integrals: test function needs center > r_s and width > 0");
    }
    const Support s = support_of(phi, bg);
    const int d = bg.d;
    out.lhs = integrate_d_rho([&](const Radius& x) { return phi.value(x.r) * phi.value(x.r); }, s, bg, q.rel_tol);
    out.rhs = integrate_dr(
        [&](const Radius& x) {
            const double dp = phi.derivative(x.r);
            return x.gap / x.r * dp * dp * std::pow(x.r, d + 2);
        },
        s, bg, q.rel_tol, 1e-30 * bg.r_s);
    out.rhs_rho = integrate_dr(
        [&](const Radius& x) {
            const double dp = phi.derivative(x.r);
            return rho_weight(x, bg) * dp * dp;
        },
        s, bg, q.rel_tol, 1e-30 * bg.r_s);
    if (!std::isfinite(out.lhs) || !std::isfinite(out.rhs) || !(out.rhs > 0.0)) {
        throw NumericalError("hardy_integrals: divergent or degenerate integrals");
    }
    return out;
}

double hardy_ratio(const TestFunction& phi, const BackgroundParams& bg, const HardyQuadrature& q)
{
    if (phi.is_zero()) {
        return 0.0;
    }
    const HardyIntegrals h = hardy_integrals(phi, bg, q);
    return h.lhs / h.rhs;
}

double time_boundary_coefficient(const Radius& x, const BackgroundParams& bg, const MultiplierProfile& prof)
{
    // f' ~ 1/(A h^2) near the horizon: square after the sqrt(A) factor so f'^2 never forms
    const double c = (prof.f_prime(x) + (bg.d + 2) * prof.f(x) / x.r) * std::sqrt(lapse(x, bg));
    return c * c;
}

double time_coefficient_envelope_ratio(double gap, const BackgroundParams& bg, const MultiplierProfile& prof)
{
    const Radius x = radius_from_gap(bg, gap);
    const double lg = std::log(gap / bg.r_s);
    return time_boundary_coefficient(x, bg, prof) * lg * lg * gap;
}

double time_boundary_check(const TestFunction& phi, const BackgroundParams& bg, const MultiplierParams& mp,
                           const HardyQuadrature& q)
{
    if (phi.is_zero()) {
        return 0.0;
    }
    const MultiplierProfile prof(bg, mp);
    const Support s = support_of(phi, bg);
    const int d = bg.d;
    const std::vector<double> splits{mp.r_break_low.gap, bg.r_ps - bg.r_s, mp.r_break_high.gap};
    const double lhs = integrate_dr(
        [&](const Radius& x) {
            const double p = phi.value(x.r);
            return time_boundary_coefficient(x, bg, prof) * p * p * std::pow(x.r, d + 2);
        },
        s, bg, q.rel_tol, 1e-280 * bg.r_s, splits);
    const double energy = integrate_dr(
        [&](const Radius& x) {
            const double dp = phi.derivative(x.r);
            return lapse(x, bg) * dp * dp * std::pow(x.r, d + 2);
        },
        s, bg, q.rel_tol, 1e-30 * bg.r_s);
    if (!std::isfinite(lhs) || !(energy > 0.0)) {
        throw NumericalError("time_boundary_check: divergent or degenerate integrals");
    }
    return lhs / energy;
}

bool has_blow_up_trend(const std::vector<double>& v)
{
    if (v.size() < 3) {
        return false;
    }
    const std::size_t n = v.size();
    const double last = v[n - 1] - v[n - 2];
    const double prev = v[n - 2] - v[n - 3];
    return last > 0.0 && std::abs(last) >= std::abs(prev);
}

HardyScan hardy_scan(const BackgroundParams& bg, const MultiplierParams& mp, const HardyScanOptions& opt)
{
    HardyScan out;
    out.d = bg.d;
    const int d = bg.d;
    const double rs = bg.r_s;
    for (const TestFunction& phi : sliding_bumps(bg, opt.bumps, 1.1, 50.0, opt.width, opt.seed)) {
        const HardyIntegrals h = hardy_integrals(phi, bg);
        out.centers.push_back(phi.center);
        out.ratios.push_back(h.lhs / h.rhs);
        out.rho_bound_ratios.push_back(h.lhs / (4.0 * h.rhs_rho));
        out.time_ratios.push_back(time_boundary_check(phi, bg, mp));
    }
    out.ratio_max = *std::max_element(out.ratios.begin(), out.ratios.end());
    out.ratio_min = *std::min_element(out.ratios.begin(), out.ratios.end());
    for (int k = 0; k <= 4; ++k) {
        out.near_extension.push_back(hardy_ratio(TestFunction{rs * (1.0 + 0.1 * std::pow(10.0, -k)), opt.width, 1.0}, bg));
    }
    for (int k = 0; k <= 3; ++k) {
        out.far_extension.push_back(hardy_ratio(TestFunction{rs * 50.0 * std::pow(10.0, k), opt.width, 1.0}, bg));
    }
    out.blow_up_trend = has_blow_up_trend(out.near_extension) || has_blow_up_trend(out.far_extension);
    for (const auto* ext : {&out.near_extension, &out.far_extension}) {
        out.ratio_max = std::max(out.ratio_max, *std::max_element(ext->begin(), ext->end()));
        out.ratio_min = std::min(out.ratio_min, *std::min_element(ext->begin(), ext->end()));
    }

    out.far_spread = log_decade_spread([&](double r) { return rho(r, bg) / std::pow(r, d + 1); }, 1e3 * rs, 1e4 * rs);
    out.near_spread = log_decade_spread(
        [&](double g) {
            const Radius x = radius_from_gap(bg, g);
            return rho(x, bg) * (1.0 - std::log(x.gap / x.r));
        },
        1e-12 * rs, 1e-11 * rs);
    out.weight_far_spread =
        log_decade_spread([&](double r) { return rho_weight(radius_at(bg, r), bg) / std::pow(r, d + 2); }, 1e3 * rs, 1e4 * rs);
    out.weight_near_spread =
        log_decade_spread([&](double g) { return rho_weight(radius_from_gap(bg, g), bg) / g; }, 1e-12 * rs, 1e-11 * rs);

    const bool bound_ok = std::all_of(out.rho_bound_ratios.begin(), out.rho_bound_ratios.end(),
                                      [](double v) { return v <= 1.0 + 1e-9; });
    out.passed = out.far_spread <= opt.spread_tol && out.near_spread <= opt.spread_tol &&
                 out.weight_far_spread <= opt.spread_tol && out.weight_near_spread <= opt.spread_tol &&
                 out.ratio_max / out.ratio_min <= opt.family_ratio_tol && !out.blow_up_trend && bound_ok;
    return out;
}

}  // namespace lemult
