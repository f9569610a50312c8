#pragma once

// Hyperspherical Schwarzschild exterior in 1+n dimensions, n = d + 3:
//
//   ds^2 = -A dt^2 + A^{-1} dr^2 + r^2 dw^2,   A(r) = 1 - (r_s/r)^{d+1}.
//
// Radii are carried together with their distance to the horizon (Radius)
// so that lapse, h(r) and the LE weights keep full relative precision when
// r - r_s << r_s.

#include <cstddef>
#include <vector>

namespace lemult {

struct BackgroundParams {
    int d = 1;          // n - 3
    double r_s = 1.0;   // Schwarzschild radius
    double r_ps = 0.0;  // photon sphere, derived

    /// Validated construction; throws DomainError unless d >= 1 and r_s > 0.
    static BackgroundParams make(int d, double r_s);
};

/// An exterior radius with its horizon offset gap = r - r_s kept separately.
struct Radius {
    double r;
    double gap;
};

Radius radius_at(const BackgroundParams& bg, double r);
Radius radius_from_gap(const BackgroundParams& bg, double gap);

double photon_sphere_radius(int d, double r_s);

double lapse(const Radius& x, const BackgroundParams& bg);
double lapse(double r, const BackgroundParams& bg);

// Lapse expressed through log y, y = (r - r_s)/r. Valid all the way down to
// y underflowing to zero, which the evolution grid reaches far down the throat.
double lapse_from_log_y(double log_y, int d);
/// A / y, which tends to d + 1 at the horizon.
double lapse_over_y(double log_y, int d);

/// h(r) = ln((r^{d+1} - r_s^{d+1}) / ((d+1)/2 r_s^{d+1})); h(r_ps) = 0.
double h_of_r(const Radius& x, const BackgroundParams& bg);
double h_of_r(double r, const BackgroundParams& bg);
/// dh/dr = (d+1) / (r A).
double h_prime(const Radius& x, const BackgroundParams& bg);

/// Inverse of h: r_theta^{d+1} = r_s^{d+1}((d+1)/2 e^theta + 1).
Radius r_of_theta(double theta, const BackgroundParams& bg);

/// Eigenvalue l(l + d + 1) of -Laplacian on S^{d+2}.
double sphere_eigenvalue(int ell, int d);

/// r_* = int_{ref}^{r} ds / A(s). The default anchor is the photon sphere.
double tortoise(const Radius& x, const BackgroundParams& bg, double ref_point);
double tortoise(const Radius& x, const BackgroundParams& bg);
double tortoise(double r, const BackgroundParams& bg, double ref_point);
/// Same, parametrised by ln(r - r_s); usable where r - r_s underflows.
double tortoise_from_log_gap(double log_gap, const BackgroundParams& bg);

/// Inverse tortoise (anchored at r_ps): returns ln(r - r_s).
double log_gap_from_tortoise(double rstar, const BackgroundParams& bg);

struct LeCoefficients {
    double c_r;
    double c_omega;
    double c_0;
};

/// Weights of the localized energy norm.
LeCoefficients le_coefficients(const Radius& x, const BackgroundParams& bg);
LeCoefficients le_coefficients(double r, const BackgroundParams& bg);

/// A * c_0 written through log y; finite at the horizon.
double lapse_times_c0(double r, double log_y, const BackgroundParams& bg);
/// c_r written through log y.
double c_r_from_log_y(double r, double log_y, const BackgroundParams& bg);

enum class CoordinateKind { areal_r, tortoise_rstar };

// Immutable radial grid. Points are stored in the grid's own coordinate
// together with the areal radius, log(r - r_s), log y and the lapse.
class RadialGrid {
public:
    /// Uniform in h on [h_lo, h_hi].
    static RadialGrid uniform_in_h(const BackgroundParams& bg, double h_lo, double h_hi, std::size_t n);
    /// Uniform in log r on [r_lo, r_hi].
    static RadialGrid uniform_in_log_r(const BackgroundParams& bg, double r_lo, double r_hi, std::size_t n);
    /// Uniform in r_* (anchored at r_ps) on [rstar_lo, rstar_hi].
    static RadialGrid uniform_in_tortoise(const BackgroundParams& bg, double rstar_lo, double rstar_hi,
                                          std::size_t n);
    /// Arbitrary areal points; sorted and de-duplicated.
    static RadialGrid from_radii(const BackgroundParams& bg, std::vector<Radius> radii);
    /// Union of areal grids.
    static RadialGrid merge(const std::vector<RadialGrid>& parts);

    CoordinateKind kind() const { return kind_; }
    const BackgroundParams& background() const { return bg_; }
    std::size_t size() const { return r_.size(); }
    bool empty() const { return r_.empty(); }

    /// Coordinate value (r or r_*) of point i.
    double point(std::size_t i) const { return coord_[i]; }
    const std::vector<double>& points() const { return coord_; }
    double areal(std::size_t i) const { return r_[i]; }
    double log_gap(std::size_t i) const { return log_gap_[i]; }
    double log_y(std::size_t i) const { return log_y_[i]; }
    double cached_lapse(std::size_t i) const { return lapse_[i]; }
    Radius radius(std::size_t i) const;

    /// Spacing of a uniform grid (0 if not uniform in its coordinate).
    double spacing() const { return spacing_; }

private:
    RadialGrid() = default;
    void fill_from_log_gap(const std::vector<double>& coords, const std::vector<double>& log_gaps,
                           const std::vector<double>& gaps = {});

    BackgroundParams bg_;
    CoordinateKind kind_ = CoordinateKind::areal_r;
    double spacing_ = 0.0;
    std::vector<double> coord_;
    std::vector<double> r_;
    std::vector<double> gap_;
    std::vector<double> log_gap_;
    std::vector<double> log_y_;
    std::vector<double> lapse_;
};

}  // namespace lemult
