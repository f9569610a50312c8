#include "lemult/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lemult/errors.hpp"
#include "lemult/quadrature.hpp"

namespace lemult {

namespace {

void require_exterior(const Radius& x, const BackgroundParams& bg)
{
    if (!(x.gap > 0.0) || !std::isfinite(x.r)) {
        std::ostringstream msg;
        msg << "radius r = " << x.r << " (r - r_s = " << x.gap << ") is not outside the horizon r_s = "
            << bg.r_s;
        throw DomainError(msg.str());
    }
}

// Integrand of the regular part of the tortoise integral, in sigma = ln(r/r_s):
//   1/A - 1 - r_s/((d+1)(r - r_s)) = R(t),  t = r/r_s,
//   R(t) t = -sum_{j>=1} j u^{j-1} / ((d+1) sum_{j>=0} u^j),  u = 1/t.
// The subtraction is exact (polynomial division), so there is no cancellation
// at either end.
double tortoise_regular_integrand(double sigma, int d)
{
    const double u = std::exp(-sigma);
    double num = 0.0;
    double den = 0.0;
    double upow = 1.0;
    for (int j = 0; j <= d; ++j) {
        den += upow;
        if (j + 1 <= d) {
            num += (j + 1) * upow;
        }
        upow *= u;
    }
    return -num / ((d + 1) * den);
}

double tortoise_impl(double r, double log_gap, const BackgroundParams& bg, double ref_point)
{
    const double gap = std::exp(log_gap);
    const double ref_gap = ref_point - bg.r_s;
    const double coef = bg.r_s / (bg.d + 1);
    const double sigma = std::log1p(gap / bg.r_s);
    const double sigma_ref = std::log1p(ref_gap / bg.r_s);
    const int d = bg.d;
    QuadratureOptions opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    const double regular =
        integrate([d](double s) { return tortoise_regular_integrand(s, d); }, sigma_ref, sigma, opt);
    return (r - ref_point) + coef * (log_gap - std::log(ref_gap)) + bg.r_s * regular;
}

}  // namespace

BackgroundParams BackgroundParams::make(int d, double r_s)
{
    BackgroundParams bg;
    bg.d = d;
    bg.r_s = r_s;
    bg.r_ps = photon_sphere_radius(d, r_s);
    return bg;
}

Radius radius_at(const BackgroundParams& bg, double r)
{
    return Radius{r, r - bg.r_s};
}

Radius radius_from_gap(const BackgroundParams& bg, double gap)
{
    return Radius{bg.r_s + gap, gap};
}

double photon_sphere_radius(int d, double r_s)
{
    if (d < 1) {
        throw DomainError("dimension parameter d = n - 3 must be >= 1, got " + std::to_string(d));
    }
    if (!(r_s > 0.0)) {
        throw DomainError("Schwarzschild radius must be positive");
    }
    return std::pow((d + 3) / 2.0, 1.0 / (d + 1)) * r_s;
}

double lapse(const Radius& x, const BackgroundParams& bg)
{
    require_exterior(x, bg);
    return -std::expm1((bg.d + 1) * std::log1p(-x.gap / x.r));
}

double lapse(double r, const BackgroundParams& bg)
{
    return lapse(radius_at(bg, r), bg);
}

double lapse_from_log_y(double log_y, int d)
{
    const double y = std::exp(log_y);
    return -std::expm1((d + 1) * std::log1p(-y));
}

double lapse_over_y(double log_y, int d)
{
    const double y = std::exp(log_y);
    const double n = d + 1;
    if (y < 1e-8) {
        return n - 0.5 * n * (n - 1) * y;
    }
    return -std::expm1(n * std::log1p(-y)) / y;
}

double h_of_r(const Radius& x, const BackgroundParams& bg)
{
    require_exterior(x, bg);
    const int n = bg.d + 1;
    // (r^{d+1} - r_s^{d+1}) / r_s^{d+1} = expm1((d+1) log1p(gap/r_s))
    return std::log(2.0 / n) + std::log(std::expm1(n * std::log1p(x.gap / bg.r_s)));
}

double h_of_r(double r, const BackgroundParams& bg)
{
    return h_of_r(radius_at(bg, r), bg);
}

double h_prime(const Radius& x, const BackgroundParams& bg)
{
    return (bg.d + 1) / (x.r * lapse(x, bg));
}

Radius r_of_theta(double theta, const BackgroundParams& bg)
{
    if (!std::isfinite(theta)) {
        throw DomainError("r_of_theta needs a finite theta");
    }
    const int n = bg.d + 1;
    const double half_n = n / 2.0;
    // ln(1 + (d+1)/2 e^theta), overflow-safe for large theta
    const double lp = theta > 30.0 ? theta + std::log(half_n) + std::log1p(std::exp(-theta) / half_n)
                                   : std::log1p(half_n * std::exp(theta));
    const double gap = bg.r_s * std::expm1(lp / n);
    return radius_from_gap(bg, gap);
}

double sphere_eigenvalue(int ell, int d)
{
    if (ell < 0) {
        throw DomainError("spherical harmonic degree must be >= 0");
    }
    return static_cast<double>(ell) * (ell + d + 1);
}

double tortoise(const Radius& x, const BackgroundParams& bg, double ref_point)
{
    require_exterior(x, bg);
    if (!(ref_point > bg.r_s)) {
        throw DomainError("tortoise anchor must lie outside the horizon");
    }
    return tortoise_impl(x.r, std::log(x.gap), bg, ref_point);
}

double tortoise(const Radius& x, const BackgroundParams& bg)
{
    return tortoise(x, bg, bg.r_ps);
}

double tortoise(double r, const BackgroundParams& bg, double ref_point)
{
    return tortoise(radius_at(bg, r), bg, ref_point);
}

double tortoise_from_log_gap(double log_gap, const BackgroundParams& bg)
{
    if (!std::isfinite(log_gap)) {
        throw DomainError("tortoise_from_log_gap needs a finite ln(r - r_s)");
    }
    return tortoise_impl(bg.r_s + std::exp(log_gap), log_gap, bg, bg.r_ps);
}

double log_gap_from_tortoise(double rstar, const BackgroundParams& bg)
{
    if (!std::isfinite(rstar)) {
        throw DomainError("inverse tortoise needs a finite r_*");
    }
    const double coef = bg.r_s / (bg.d + 1);
    auto residual = [&](double lg) { return tortoise_from_log_gap(lg, bg) - rstar; };
    // dr_*/d ln(gap) = gap / A = r / (A/y)
    auto slope = [&](double lg) {
        const double gap = std::exp(lg);
        const double r = bg.r_s + gap;
        return r / lapse_over_y(lg - std::log(r), bg.d);
    };

    const double lg_rs = std::log(bg.r_s);
    const double rstar_rs = tortoise_from_log_gap(lg_rs, bg);
    double lg = rstar <= rstar_rs ? lg_rs + (rstar - rstar_rs) / coef
                                  : std::log(bg.r_s + (rstar - rstar_rs));

    // bracket
    double lo = lg - 1.0;
    double hi = lg + 1.0;
    while (residual(lo) > 0.0) {
        lo -= 2.0 * (hi - lo);
    }
    while (residual(hi) < 0.0) {
        hi += 2.0 * (hi - lo);
    }
    for (int it = 0; it < 200; ++it) {
        const double f = residual(lg);
        if (std::abs(f) <= 1e-15 * std::max(1.0, std::abs(rstar))) {
            return lg;
        }
        if (f > 0.0) {
            hi = lg;
        } else {
            lo = lg;
        }
        double next = lg - f / slope(lg);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - lg) <= 1e-14 * std::max(1.0, std::abs(lg))) {
            return next;
        }
        lg = next;
    }
    throw NumericalError("inverse tortoise did not converge for r_* = " + std::to_string(rstar));
}

LeCoefficients le_coefficients(const Radius& x, const BackgroundParams& bg)
{
    require_exterior(x, bg);
    const double log_y = std::log(x.gap) - std::log(x.r);
    const double big_l = 1.0 - log_y;
    const double y = x.gap / x.r;
    const double r = x.r;
    const double w = (r - bg.r_ps) / r;
    LeCoefficients c;
    c.c_r = 1.0 / (std::pow(r, bg.d + 3) * big_l * big_l);
    c.c_omega = w * w / r;
    c.c_0 = 1.0 / (y * r * r * r * std::pow(big_l, 4));
    return c;
}

LeCoefficients le_coefficients(double r, const BackgroundParams& bg)
{
    return le_coefficients(radius_at(bg, r), bg);
}

double lapse_times_c0(double r, double log_y, const BackgroundParams& bg)
{
    const double big_l = 1.0 - log_y;
    return lapse_over_y(log_y, bg.d) / (r * r * r * std::pow(big_l, 4));
}

double c_r_from_log_y(double r, double log_y, const BackgroundParams& bg)
{
    const double big_l = 1.0 - log_y;
    return 1.0 / (std::pow(r, bg.d + 3) * big_l * big_l);
}

// ---------------------------------------------------------------------------
// RadialGrid

Radius RadialGrid::radius(std::size_t i) const
{
    return Radius{r_[i], gap_[i]};
}

void RadialGrid::fill_from_log_gap(const std::vector<double>& coords, const std::vector<double>& log_gaps,
                                   const std::vector<double>& gaps)
{
    coord_ = coords;
    log_gap_ = log_gaps;
    const std::size_t n = coords.size();
    r_.resize(n);
    gap_.resize(n);
    log_y_.resize(n);
    lapse_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        gap_[i] = gaps.empty() ? std::exp(log_gaps[i]) : gaps[i];
        r_[i] = bg_.r_s + gap_[i];
        log_y_[i] = log_gaps[i] - std::log(r_[i]);
        lapse_[i] = lapse_from_log_y(log_y_[i], bg_.d);
        if (i > 0 && !(log_gap_[i] > log_gap_[i - 1])) {
            throw DomainError("radial grid points must be strictly increasing");
        }
    }
}

RadialGrid RadialGrid::uniform_in_h(const BackgroundParams& bg, double h_lo, double h_hi, std::size_t n)
{
    if (n < 2 || !(h_hi > h_lo)) {
        throw DomainError("uniform_in_h needs n >= 2 and h_lo < h_hi");
    }
    RadialGrid g;
    g.bg_ = bg;
    std::vector<double> coords(n);
    std::vector<double> lgs(n);
    std::vector<double> gaps(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = h_lo + (h_hi - h_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const Radius x = r_of_theta(theta, bg);
        coords[i] = x.r;
        lgs[i] = std::log(x.gap);
        gaps[i] = x.gap;
    }
    g.fill_from_log_gap(coords, lgs, gaps);
    return g;
}

RadialGrid RadialGrid::uniform_in_log_r(const BackgroundParams& bg, double r_lo, double r_hi, std::size_t n)
{
    if (n < 2 || !(r_hi > r_lo) || !(r_lo > bg.r_s)) {
        throw DomainError("uniform_in_log_r needs n >= 2 and r_s < r_lo < r_hi");
    }
    RadialGrid g;
    g.bg_ = bg;
    std::vector<double> coords(n);
    std::vector<double> lgs(n);
    const double a = std::log(r_lo);
    const double b = std::log(r_hi);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        coords[i] = r;
        lgs[i] = std::log(r - bg.r_s);
    }
    g.fill_from_log_gap(coords, lgs);
    return g;
}

RadialGrid RadialGrid::uniform_in_tortoise(const BackgroundParams& bg, double rstar_lo, double rstar_hi,
                                           std::size_t n)
{
    if (n < 2 || !(rstar_hi > rstar_lo)) {
        throw DomainError("uniform_in_tortoise needs n >= 2 and rstar_lo < rstar_hi");
    }
    RadialGrid g;
    g.bg_ = bg;
    g.kind_ = CoordinateKind::tortoise_rstar;
    g.spacing_ = (rstar_hi - rstar_lo) / static_cast<double>(n - 1);
    std::vector<double> coords(n);
    std::vector<double> lgs(n);
    for (std::size_t i = 0; i < n; ++i) {
        coords[i] = rstar_lo + g.spacing_ * static_cast<double>(i);
        lgs[i] = log_gap_from_tortoise(coords[i], bg);
    }
    g.fill_from_log_gap(coords, lgs);
    return g;
}

RadialGrid RadialGrid::from_radii(const BackgroundParams& bg, std::vector<Radius> radii)
{
    std::sort(radii.begin(), radii.end(), [](const Radius& a, const Radius& b) { return a.gap < b.gap; });
    radii.erase(std::unique(radii.begin(), radii.end(),
                            [](const Radius& a, const Radius& b) { return a.gap == b.gap; }),
                radii.end());
    RadialGrid g;
    g.bg_ = bg;
    std::vector<double> coords;
    std::vector<double> lgs;
    std::vector<double> gaps;
    for (const Radius& x : radii) {
        require_exterior(x, bg);
        coords.push_back(x.r);
        lgs.push_back(std::log(x.gap));
        gaps.push_back(x.gap);
    }
    g.fill_from_log_gap(coords, lgs, gaps);
    return g;
}

RadialGrid RadialGrid::merge(const std::vector<RadialGrid>& parts)
{
    if (parts.empty()) {
        throw DomainError("cannot merge an empty list of grids");
    }
    std::vector<Radius> radii;
    for (const RadialGrid& p : parts) {
        if (p.kind() != CoordinateKind::areal_r) {
            throw DomainError("only areal grids can be merged");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            radii.push_back(p.radius(i));
        }
    }
    return from_radii(parts.front().background(), std::move(radii));
}

}  // namespace lemult
