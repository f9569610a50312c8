#pragma once

// The weighted Hardy inequality that controls the zeroth-order time-boundary
// term, built from the density
//
//   rho(r) = int_{r_s}^r x^d / (L(x)^2 y(x)) dx,   y = (x - r_s)/x,  L = 1 - log y.
//
// Near the horizon rho is computed through v = 1/L, which turns the
// logarithmic endpoint into a smooth one; beyond 2 r_s the integral runs in log x.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lemult/geometry.hpp"
#include "lemult/multiplier.hpp"

namespace lemult {

double rho(const Radius& x, const BackgroundParams& bg);
double rho(double r, const BackgroundParams& bg);
double rho_prime(const Radius& x, const BackgroundParams& bg);
/// rho^2 / rho'.
double rho_weight(const Radius& x, const BackgroundParams& bg);

struct HardyProfile {
    std::vector<double> r;
    std::vector<double> rho;
    std::vector<double> rho_prime;
    std::vector<double> hardy_weight;
};

HardyProfile tabulate_hardy(const BackgroundParams& bg, const RadialGrid& grid);

/// Radial test function phi(r) = amplitude exp(-(ln(r/center))^2 / (2 width^2)).
struct TestFunction {
    double center = 3.0;
    double width = 0.25;
    double amplitude = 1.0;

    double value(double r) const;
    double derivative(double r) const;
    bool is_zero() const { return amplitude == 0.0; }
};

/// Bumps with centres log-spaced over [lo, hi] (in units of r_s). A nonzero
/// seed jitters the centres inside their log cells, reproducibly.
std::vector<TestFunction> sliding_bumps(const BackgroundParams& bg, std::size_t count, double lo_over_rs = 1.1,
                                        double hi_over_rs = 50.0, double width = 0.25, std::uint64_t seed = 0);

struct HardyIntegrals {
    double lhs = 0.0;        // int rho' phi^2 dr
    double rhs = 0.0;        // int y (phi')^2 r^{d+2} dr
    double rhs_rho = 0.0;    // int rho^2/rho' (phi')^2 dr; lhs <= 4 rhs_rho
};

struct HardyQuadrature {
    double rel_tol = 1e-10;
};

HardyIntegrals hardy_integrals(const TestFunction& phi, const BackgroundParams& bg, const HardyQuadrature& q = {});
/// lhs / rhs; 0 for the zero function.
double hardy_ratio(const TestFunction& phi, const BackgroundParams& bg, const HardyQuadrature& q = {});

/// [r^{-(d+2)} d_r(f r^{d+2})]^2 A.
double time_boundary_coefficient(const Radius& x, const BackgroundParams& bg, const MultiplierProfile& prof);
/// The same coefficient divided by (log(r - r_s))^{-2} (r - r_s)^{-1}.
double time_coefficient_envelope_ratio(double gap, const BackgroundParams& bg, const MultiplierProfile& prof);

/// int coeff phi^2 r^{d+2} dr over the static mode energy int A (phi')^2 r^{d+2} dr.
double time_boundary_check(const TestFunction& phi, const BackgroundParams& bg, const MultiplierParams& mp,
                           const HardyQuadrature& q = {});

/// Largest relative spread of g over `points` log-spaced samples on [a, b].
template <class G>
double log_decade_spread(G&& g, double a, double b, int points = 11);

struct HardyScan {
    int d = 1;
    std::vector<double> centers;
    std::vector<double> ratios;
    std::vector<double> rho_bound_ratios;  // lhs / (4 rhs_rho), <= 1
    std::vector<double> time_ratios;
    double ratio_max = 0.0;
    double ratio_min = 0.0;
    std::vector<double> near_extension;  // bumps pushed toward r_s: 1 + 0.1 * 10^{-k}
    std::vector<double> far_extension;   // bumps pushed outward: 50 * 10^k
    bool blow_up_trend = false;
    double far_spread = 0.0;        // rho / r^{d+1} over [1e3, 1e4] r_s
    double near_spread = 0.0;       // rho L over gaps [1e-12, 1e-11] r_s
    double weight_far_spread = 0.0; // (rho^2/rho') / r^{d+2}
    double weight_near_spread = 0.0; // (rho^2/rho') / (r - r_s)
    bool passed = false;
};

struct HardyScanOptions {
    std::size_t bumps = 24;
    double width = 0.25;
    std::uint64_t seed = 0;
    double spread_tol = 0.02;
    double family_ratio_tol = 10.0;
};

HardyScan hardy_scan(const BackgroundParams& bg, const MultiplierParams& mp, const HardyScanOptions& opt = {});

/// A sequence of ratios taken ever closer to one end of the family blows up when
/// it is still growing and its increments have stopped contracting.
bool has_blow_up_trend(const std::vector<double>& toward_end);

// ---------------------------------------------------------------------------

template <class G>
double log_decade_spread(G&& g, double a, double b, int points)
{
    double lo = 0.0;
    double hi = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = a * std::pow(b / a, static_cast<double>(i) / (points - 1));
        const double v = g(x);
        if (i == 0) {
            lo = hi = v;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return (hi - lo) / std::abs(lo);
}

}  // namespace lemult
