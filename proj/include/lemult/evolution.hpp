#pragma once

// Mode-by-mode evolution of the wave equation on the exterior. With
// phi = u(t, r) Y_l(w) and r_* the tortoise coordinate,
//
//   d_t^2 u = r^{-(d+2)} d_*(r^{d+2} d_* u) - A l(l+d+1)/r^2 u.
//
// The grid is uniform in r_*; the operator is discretised in flux form with
// weights r^{d+2} at nodes and faces, so it is symmetric for the mass
// sum_i r_i^{d+2} and the discrete energy is a quadratic form. Implicit
// midpoint stepping conserves that form up to solver roundoff. Both ends
// are reflecting (no flux); the domain is taken long enough that nothing
// reaches them before t_final, and runs report when something does.

#include <memory>
#include <string>
#include <vector>

#include "lemult/geometry.hpp"
#include "lemult/multiplier.hpp"

namespace lemult {

enum class DataKind {
    time_symmetric,  // v = 0
    outgoing,        // v = -d_* u
};

std::string to_string(DataKind k);

/// Gaussian in r_*: amplitude exp(-(r_* - r_*(center))^2 / (2 width^2)).
struct InitialData {
    DataKind kind = DataKind::time_symmetric;
    double center_r = 5.0;  // areal radius, units of r_s
    double width = 0.5;     // in r_*
    double amplitude = 1.0;
};

struct EvolutionConfig {
    BackgroundParams bg;
    MultiplierParams mp;
    std::vector<int> ells{0, 1, 2};
    double rstar_lo = -260.0;
    double rstar_hi = 260.0;
    double spacing = 0.05;
    double dt = 0.025;
    double t_final = 100.0;
    InitialData data;
    int cadence = 10;           // steps between stored samples
    bool track_identity = true;  // accumulate the divergence-identity residual
    bool drop_jump_term = false;  // ablation: leave out the r_{-1/eps} term

    static EvolutionConfig defaults(const BackgroundParams& bg);
    /// Throws DomainError listing every violated precondition.
    void validate() const;
    std::size_t points() const;
};

/// Tortoise grid of a configuration, with the face radii the flux form needs.
struct EvolutionGrid {
    RadialGrid nodes;
    RadialGrid faces;  // midpoints, size nodes.size() - 1

    static std::shared_ptr<const EvolutionGrid> make(const BackgroundParams& bg, double rstar_lo, double rstar_hi,
                                                     double spacing);
    double spacing() const { return nodes.spacing(); }
};

struct ModeState {
    int ell = 0;
    double t = 0.0;
    std::shared_ptr<const EvolutionGrid> grid;
    std::vector<double> u;
    std::vector<double> v;
};

/// Discretised radial operator for one l.
struct RadialOperator {
    int ell = 0;
    double lambda = 0.0;
    double spacing = 0.0;
    std::vector<double> mass;       // r_i^{d+2}
    std::vector<double> face;       // r_{i+1/2}^{d+2}
    std::vector<double> potential;  // A l(l+d+1) / r^2 at nodes

    /// (L u)_i
    void apply(const std::vector<double>& u, std::vector<double>& out) const;
};

RadialOperator reduce_wave_operator(int ell, const EvolutionGrid& grid);

ModeState initial_state(const InitialData& data, int ell, std::shared_ptr<const EvolutionGrid> grid);

// Implicit midpoint for (u, v): (M + dt^2/4 S) u' = (M - dt^2/4 S) u + dt M v,
// v' = 2 (u' - u)/dt - v, with S the stiffness form. The tridiagonal matrix is
// factored once.
class Stepper {
public:
    Stepper(RadialOperator op, double dt);
    ModeState step(const ModeState& s) const;
    double dt() const { return dt_; }
    const RadialOperator& op() const { return op_; }

private:
    RadialOperator op_;
    double dt_;
    std::vector<double> diag_;   // of M + dt^2/4 S
    std::vector<double> upper_;  // off-diagonal
    std::vector<double> c_;      // Thomas factors
    std::vector<double> inv_;
};

/// One step; throws DomainError on a CFL violation (dt > spacing / 2) and
/// NumericalError on non-finite output.
ModeState step(const ModeState& s, double dt);

/// sum M v^2 + u^T S u, times the spacing: the mode energy.
double energy_of_mode(const ModeState& s, const RadialOperator& op);
double energy_of_mode(const ModeState& s);

// LE integrand weights per unit r_*, finite down the whole throat.
struct LeWeights {
    std::vector<double> grad;  // c_r r^{d+2}, at faces
    std::vector<double> ang;   // A c_w lambda / r^2 r^{d+2}, at nodes
    std::vector<double> zero;  // A c_0 r^{d+2}, at nodes
};

LeWeights le_weights(int ell, const EvolutionGrid& grid);
/// The LE integrand integrated over the grid at one time.
double le_density(const ModeState& s, const LeWeights& w);
/// Trapezoid increment between two states dt apart.
double le_increment(const ModeState& a, const ModeState& b, const LeWeights& w);

// The divergence identity for one mode: boundary terms at 0 and t against the
// bulk f', angular and l(f) integrals plus the r_{-1/eps} term.
class BaseIdentity {
public:
    BaseIdentity(const MultiplierProfile& prof, int ell, std::shared_ptr<const EvolutionGrid> grid);

    /// -int f v u_* r^m - 1/2 int (f' + m f/r) A u v r^m, per unit r_*.
    double boundary(const ModeState& s) const;
    /// f' A u_*^2 + angular + l(f) A u^2, integrated; l(f) is split at its jumps.
    double bulk(const ModeState& s) const;
    /// 1/4 r_b^m A_b^2 (f''^- - f''^+) u(r_b)^2
    double jump(const ModeState& s) const;
    double jump_location() const { return s_jump_; }

private:
    struct Split {
        std::size_t cell;
        double s;        // r_* of the discontinuity
        double lo;       // A l(f) r^m from below
        double hi;       // from above
    };
    double interp(const std::vector<double>& u, double s) const;

    std::shared_ptr<const EvolutionGrid> grid_;
    int m_ = 3;
    std::vector<double> b_flux_;   // f r^m, nodes
    std::vector<double> b_mix_;    // 1/2 (f' + m f / r) A r^m, nodes
    std::vector<double> k_grad_;   // f' A r^m, faces
    std::vector<double> k_ang_;    // A (1 - (r_ps/r)^{d+1}) f lambda / r^3 r^m, nodes
    std::vector<double> k_zero_;   // A l(f) r^m, nodes; from above at a breakpoint
    std::vector<double> k_zero_left_;  // same, but from below: used as a cell's right end
    std::vector<Split> splits_;
    double s_jump_ = 0.0;
    double jump_coef_ = 0.0;
};

struct EnergyLeSeries {
    int ell = 0;
    DataKind kind = DataKind::time_symmetric;
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> le_accum;
    std::vector<double> base_residual;  // empty unless tracked
    double e0 = 0.0;
    double max_drift = 0.0;        // max |E(t) - E(0)| / E(0)
    double sup_energy = 0.0;
    bool contaminated = false;     // something reached a grid end
    double contamination_time = 0.0;
    std::vector<std::string> warnings;

    /// le_accum at the stored sample closest to t.
    double le_at(double t) const;
    /// (sup E + le_accum(T)) / E(0)
    double bound_ratio() const;
};

EnergyLeSeries evolve_mode(const EvolutionConfig& cfg, int ell);
std::vector<EnergyLeSeries> evolve(const EvolutionConfig& cfg);

/// Residual of the identity from a stored history (uniform cadence).
/// Throws DomainError if the history is too sparse for the time quadrature.
double base_identity_residual(const std::vector<ModeState>& history, const MultiplierProfile& prof,
                              bool drop_jump_term = false);

/// Observed order from three values at spacings h, h/2, h/4.
double observed_order(double coarse, double mid, double fine);

}  // namespace lemult
