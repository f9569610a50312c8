#include "lemult/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "lemult/errors.hpp"
#include "lemult/numdiff.hpp"

namespace lemult {

namespace {

// r^{d+1} - r_s^{d+1}, accurate for r - r_s << r_s
double horizon_power_gap(const Radius& x, const BackgroundParams& bg)
{
    const int n = bg.d + 1;
    return std::pow(bg.r_s, n) * std::expm1(n * std::log1p(x.gap / bg.r_s));
}

bool near(double x, double xb)
{
    return std::abs(x - xb) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(xb));
}

}  // namespace

// ---------------------------------------------------------------------------
// parameters

MultiplierParams MultiplierParams::make(const BackgroundParams& bg, double eps, double delta, double delta0)
{
    std::ostringstream why;
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        why << " eps must be > 0;";
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        why << " delta must lie in (0, 1);";
    }
    if (!(delta0 > 0.0 && delta0 < 1.0)) {
        why << " delta0 must lie in (0, 1);";
    }
    if (!why.str().empty()) {
        throw DomainError("invalid multiplier parameters:" + why.str());
    }
    MultiplierParams mp;
    mp.eps = eps;
    mp.delta = delta;
    mp.delta0 = delta0;
    mp.alpha = 5.0 - delta0;
    mp.r_break_low = r_of_theta(-1.0 / eps, bg);
    mp.r_break_high = r_of_theta(mp.alpha, bg);
    return mp;
}

MultiplierParams MultiplierParams::defaults(const BackgroundParams& bg)
{
    return make(bg, 0.05, 0.1, 0.1);
}

MultiplierParams MultiplierParams::with_alpha(const BackgroundParams& bg, double eps, double delta, double alpha)
{
    if (!(alpha > 0.0)) {
        throw DomainError("alpha must be positive");
    }
    MultiplierParams mp = make(bg, eps, delta, 0.5);
    mp.alpha = alpha;
    mp.delta0 = 5.0 - alpha;
    mp.alpha_override = true;
    mp.r_break_high = r_of_theta(alpha, bg);
    return mp;
}

// ---------------------------------------------------------------------------
// a(x)

namespace {

template <class T>
T a_value(T x, APiece piece, const MultiplierParams& mp)
{
    switch (piece) {
    case APiece::horizon: {
        const T e = mp.eps;
        const T y = e * x + 1;
        return -(y / (T(mp.delta) * y - 1)) / e - 1 / e;
    }
    case APiece::identity:
        return x;
    case APiece::quintic: {
        const T al2 = T(mp.alpha) * T(mp.alpha);
        const T x2 = x * x;
        return x - 2 * x * x2 / (3 * al2) + x * x2 * x2 / (5 * al2 * al2);
    }
    default:
        return T(8) * T(mp.alpha) / 15;
    }
}

}  // namespace

ADerivatives a_piece(double x, APiece piece, const MultiplierParams& mp)
{
    ADerivatives ad;
    switch (piece) {
    case APiece::horizon: {
        // a = -(1/eps) (eps x + 1)/(delta(eps x + 1) - 1) - 1/eps
        const double e = mp.eps;
        const double dl = mp.delta;
        const double y = e * x + 1.0;
        const double den = dl * y - 1.0;
        ad.a = -(y / den) / e - 1.0 / e;
        ad.a1 = 1.0 / (den * den);
        ad.a2 = -2.0 * dl * e / (den * den * den);
        ad.a3 = 6.0 * dl * dl * e * e / (den * den * den * den);
        break;
    }
    case APiece::identity:
        ad.a = x;
        ad.a1 = 1.0;
        break;
    case APiece::quintic: {
        const double al2 = mp.alpha * mp.alpha;
        const double al4 = al2 * al2;
        const double x2 = x * x;
        ad.a = x - 2.0 * x * x2 / (3.0 * al2) + x * x2 * x2 / (5.0 * al4);
        ad.a1 = (x2 - al2) * (x2 - al2) / al4;
        ad.a2 = 4.0 * x * (x2 - al2) / al4;
        ad.a3 = 4.0 * (3.0 * x2 - al2) / al4;
        break;
    }
    case APiece::plateau:
        ad.a = 8.0 * mp.alpha / 15.0;
        break;
    }
    return ad;
}

APiece a_piece_at(double x, const MultiplierParams& mp, Side side)
{
    const double xb = mp.x_break_low();
    auto pick = [side](double xv, double b, APiece lo, APiece hi) -> std::optional<APiece> {
        if (near(xv, b)) {
            return side == Side::below ? lo : hi;
        }
        return std::nullopt;
    };
    if (auto p = pick(x, xb, APiece::horizon, APiece::identity)) {
        return *p;
    }
    if (auto p = pick(x, 0.0, APiece::identity, APiece::quintic)) {
        return *p;
    }
    if (auto p = pick(x, mp.alpha, APiece::quintic, APiece::plateau)) {
        return *p;
    }
    if (x < xb) {
        return APiece::horizon;
    }
    if (x < 0.0) {
        return APiece::identity;
    }
    if (x < mp.alpha) {
        return APiece::quintic;
    }
    return APiece::plateau;
}

double a_eval(double x, int order, const MultiplierParams& mp, Side side)
{
    if (order < 0 || order > 3) {
        throw DomainError("a(x) derivative order must be 0..3, got " + std::to_string(order));
    }
    if (side == Side::none) {
        const bool jump = (order >= 2 && near(x, mp.x_break_low())) ||
                          (order == 3 && (near(x, 0.0) || near(x, mp.alpha)));
        if (jump) {
            throw DomainError("a^(" + std::to_string(order) + ") is discontinuous at x = " + std::to_string(x) +
                              "; a side must be selected");
        }
    }
    const ADerivatives ad = a_piece(x, a_piece_at(x, mp, side), mp);
    switch (order) {
    case 0:
        return ad.a;
    case 1:
        return ad.a1;
    case 2:
        return ad.a2;
    default:
        return ad.a3;
    }
}

// ---------------------------------------------------------------------------
// closed forms

double g_eval(const Radius& x, const BackgroundParams& bg)
{
    if (!(x.gap > 0.0)) {
        throw DomainError("g(r) is defined only outside the horizon");
    }
    return 1.0 - std::pow(bg.r_ps / x.r, bg.d + 2);
}

double g_eval(double r, const BackgroundParams& bg)
{
    return g_eval(radius_at(bg, r), bg);
}

double g_prime(const Radius& x, const BackgroundParams& bg)
{
    return (bg.d + 2) * std::pow(bg.r_ps, bg.d + 2) / std::pow(x.r, bg.d + 3);
}

double l_of_g(const Radius& x, const BackgroundParams& bg)
{
    const int d = bg.d;
    const double r = x.r;
    const double rn = std::pow(r, d + 1);
    const double sn = std::pow(bg.r_s, d + 1);
    return (d + 2) / (4.0 * std::pow(r, 2 * d + 5)) * (d * rn * rn + (d + 3) * sn * rn - (d + 2) * (d + 2) * sn * sn);
}

double l_of_h_term(const Radius& x, const BackgroundParams& bg)
{
    const int d = bg.d;
    const double r = x.r;
    const double sn = std::pow(bg.r_s, d + 1);
    return -(d + 2) * (d + 1) / 4.0 * bg.r_ps * sn / std::pow(r, 2 * d + 6) *
           (2.0 * std::pow(r, d + 1) - (d + 3) * sn);
}

LfATerms l_of_a_terms(const Radius& x, const BackgroundParams& bg, const ADerivatives& ad)
{
    const double d = bg.d;
    const double r = x.r;
    const double c = bg.r_ps * std::pow(bg.r_s, bg.d + 1);
    LfATerms t;
    t.with_a1 = (d + 1) * (d + 2) / 2.0 * c / std::pow(r, 2 * d + 6) *
                (std::pow(bg.r_ps, d + 1) - std::pow(r, d + 1)) * ad.a1;
    t.with_a2 = (d + 1) * (d + 1) * (d + 2) * (d + 5) / (4.0 * (d + 3)) * c / std::pow(r, d + 5) * ad.a2;
    t.with_a3 = -(d + 1) * (d + 1) * (d + 1) * (d + 2) / (4.0 * (d + 3)) * c / std::pow(r, 4) /
                horizon_power_gap(x, bg) * ad.a3;
    return t;
}

double oracle_step(const Radius& x, const BackgroundParams& bg)
{
    // stay smooth while (d+2)(r - r_s)/r_s, stretched by the stencil reach, is small
    const double k = std::log(0.03 / ((bg.d + 2) * x.gap / bg.r_s)) / 6.0;
    return std::clamp(k, 0.03, 0.2);
}

double oracle_reach(double log_step)
{
    // three nested five-point stencils of half-width 2 * step
    return 6.0 * log_step;
}

namespace {

// Nested differences in sigma = ln(r - r_s), carried out in type T.
template <class T, class W>
T nested_l(W&& w_of_gap, T gap0, const BackgroundParams& bg, T s)
{
    const int m = bg.d + 2;
    const int n = bg.d + 1;
    const T rs = bg.r_s;
    auto r_of = [rs](T gap) { return rs + gap; };
    // A = 1 - (r_s/r)^{d+1} = -expm1((d+1) log1p(-gap/r))
    auto lapse_of = [&](T gap) { return -std::expm1(T(n) * std::log1p(-gap / r_of(gap))); };
    auto dgap = [s](auto&& fn, T sigma) { return std::exp(-sigma) * numdiff::centred_first(fn, sigma, s); };

    auto f1 = [&](T sigma) {
        const T gap = std::exp(sigma);
        return w_of_gap(gap) * std::pow(r_of(gap), m);
    };
    auto f2 = [&](T sigma) {
        const T gap = std::exp(sigma);
        return lapse_of(gap) * std::pow(r_of(gap), -m) * dgap(f1, sigma);
    };
    auto f3 = [&](T sigma) {
        const T gap = std::exp(sigma);
        return lapse_of(gap) * std::pow(r_of(gap), m) * dgap(f2, sigma);
    };
    return T(-0.25) * std::pow(r_of(gap0), -m) * dgap(f3, std::log(gap0));
}

double checked_step(const Radius& x, const BackgroundParams& bg, const OracleOptions& opt)
{
    if (!(x.gap > 0.0)) {
        throw DomainError("l-operator oracle needs a point outside the horizon");
    }
    const double s = opt.log_step == 0.0 ? oracle_step(x, bg) : opt.log_step;
    if (!(s > 0.0)) {
        throw NumericalError("l-operator oracle: non-positive step");
    }
    if (std::log(x.gap) - oracle_reach(s) < std::log(1e-290)) {
        throw NumericalError("l-operator oracle: stencil underflows at the horizon");
    }
    return s;
}

}  // namespace

double l_operator_oracle(const std::function<double(const Radius&)>& w, const Radius& x,
                         const BackgroundParams& bg, const OracleOptions& opt)
{
    const double s = checked_step(x, bg, opt);
    auto wg = [&](double gap) { return w(radius_from_gap(bg, gap)); };
    return nested_l<double>(wg, x.gap, bg, s);
}

double l_operator_oracle(const std::function<long double(long double)>& w_of_gap, const Radius& x,
                         const BackgroundParams& bg, const OracleOptions& opt)
{
    const double s = checked_step(x, bg, opt);
    return static_cast<double>(nested_l<long double>(w_of_gap, x.gap, bg, s));
}

// ---------------------------------------------------------------------------
// profile

MultiplierProfile::MultiplierProfile(const BackgroundParams& bg, const MultiplierParams& mp)
    : bg_(bg), mp_(mp), weight_((bg.d + 2.0) / (bg.d + 3.0) * bg.r_ps * std::pow(bg.r_s, bg.d + 1))
{
}

bool MultiplierProfile::at_break(double x, double xb) const
{
    return near(x, xb);
}

APiece MultiplierProfile::piece(const Radius& x, Side side) const
{
    return a_piece_at(h_of_r(x, bg_), mp_, side);
}

Region MultiplierProfile::region(const Radius& x, Side side) const
{
    switch (piece(x, side)) {
    case APiece::horizon:
        return Region::case1;
    case APiece::identity:
        return Region::case2;
    case APiece::quintic:
        return Region::case3;
    default:
        return Region::case4;
    }
}

double MultiplierProfile::f_on_piece(const Radius& x, APiece p) const
{
    const ADerivatives ad = a_piece(h_of_r(x, bg_), p, mp_);
    return g_eval(x, bg_) + weight_ * std::pow(x.r, -(bg_.d + 2)) * ad.a;
}

double MultiplierProfile::f_prime_on_piece(const Radius& x, APiece p) const
{
    const ADerivatives ad = a_piece(h_of_r(x, bg_), p, mp_);
    const int d = bg_.d;
    return g_prime(x, bg_) - (d + 2) * weight_ * std::pow(x.r, -(d + 3)) * ad.a +
           weight_ * std::pow(x.r, -(d + 2)) * ad.a1 * h_prime(x, bg_);
}

long double MultiplierProfile::f_on_piece_extended(long double gap, APiece p) const
{
    using T = long double;
    const int n = bg_.d + 1;
    const T rs = bg_.r_s;
    const T r = rs + gap;
    const T h = std::log(T(2) / n) + std::log(std::expm1(n * std::log1p(gap / rs)));
    const T g = 1 - std::pow(T(bg_.r_ps) / r, bg_.d + 2);
    return g + T(weight_) * std::pow(r, -(bg_.d + 2)) * a_value<T>(h, p, mp_);
}

double MultiplierProfile::f(const Radius& x) const
{
    return f_on_piece(x, piece(x));
}

double MultiplierProfile::f(double r) const
{
    return f(radius_at(bg_, r));
}

double MultiplierProfile::f_prime(const Radius& x) const
{
    return f_prime_on_piece(x, piece(x));
}

double MultiplierProfile::f_prime(double r) const
{
    return f_prime(radius_at(bg_, r));
}

double MultiplierProfile::l_f_on_piece(const Radius& x, APiece p) const
{
    const double lg = l_of_g(x, bg_);
    switch (p) {
    case APiece::identity:
        return lg + l_of_h_term(x, bg_);
    case APiece::plateau:
        return lg;
    default:
        return lg + l_of_a_terms(x, bg_, a_piece(h_of_r(x, bg_), p, mp_)).sum();
    }
}

double MultiplierProfile::l_f_closed(const Radius& x, Side side) const
{
    const double h = h_of_r(x, bg_);
    if (side == Side::none &&
        (at_break(h, mp_.x_break_low()) || at_break(h, 0.0) || at_break(h, mp_.alpha))) {
        throw DomainError("l(f) is discontinuous at r = " + std::to_string(x.r) + "; a side must be selected");
    }
    return l_f_on_piece(x, a_piece_at(h, mp_, side));
}

double MultiplierProfile::l_f_closed(double r, Side side) const
{
    return l_f_closed(radius_at(bg_, r), side);
}

double MultiplierProfile::f_second_jump() const
{
    const Radius& rb = mp_.r_break_low;
    const double hp = h_prime(rb, bg_);
    return 2.0 * mp_.delta * mp_.eps * weight_ / std::pow(rb.r, bg_.d + 2) * hp * hp;
}

bool MultiplierProfile::oracle_interior(const Radius& x, double margin) const
{
    const double reach = margin * oracle_reach(oracle_step(x, bg_));
    const double h_lo = h_of_r(radius_from_gap(bg_, x.gap * std::exp(-reach)), bg_);
    const double h_hi = h_of_r(radius_from_gap(bg_, x.gap * std::exp(reach)), bg_);
    for (double b : {mp_.x_break_low(), 0.0, mp_.alpha}) {
        if (b >= h_lo && b <= h_hi) {
            return false;
        }
    }
    return true;
}

ProfileTable MultiplierProfile::tabulate(const RadialGrid& grid) const
{
    ProfileTable t;
    const std::size_t n = grid.size();
    t.f.resize(n);
    t.f_prime.resize(n);
    t.l_f.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Radius x = grid.radius(i);
        const APiece p = piece(x, Side::above);
        t.f[i] = f_on_piece(x, p);
        t.f_prime[i] = f_prime_on_piece(x, p);
        t.l_f[i] = l_f_on_piece(x, p);
    }
    return t;
}

}  // namespace lemult
