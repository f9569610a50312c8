#pragma once

// The radial multiplier
//
//   f(r) = g(r) + K r^{-(d+2)} a(h(r)),   K = (d+2)/(d+3) r_ps r_s^{d+1},
//   g(r) = 1 - (r_ps/r)^{d+2},
//
// where a(x) smooths the logarithm h near the horizon (x <= -1/eps) and caps
// it far out (x >= alpha). Together with the zeroth-order operator
//
//   l(w) = -1/4 r^{-(d+2)} d/dr[A r^{d+2} d/dr{A r^{-(d+2)} d/dr(w r^{d+2})}]
//
// these are the ingredients of the integrated divergence identity.

#include <functional>
#include <vector>

#include "lemult/geometry.hpp"

namespace lemult {

/// One-sided selector at the breakpoints of a(x) and of the multiplier.
enum class Side { none, below, above };

/// The four pieces of a(x), in increasing x.
enum class APiece { horizon, identity, quintic, plateau };

/// The four regions of the exterior, one per piece of a(h(r)).
enum class Region { case1, case2, case3, case4 };

struct MultiplierParams {
    double eps = 0.05;
    double delta = 0.1;
    double delta0 = 0.1;
    double alpha = 4.9;           // 5 - delta0
    bool alpha_override = false;  // set only by with_alpha(); skips 0 < alpha < 5
    Radius r_break_low{};         // r_{-1/eps}
    Radius r_break_high{};        // r_alpha

    /// Validated construction: eps > 0, 0 < delta < 1, 0 < delta0 < 1.
    static MultiplierParams make(const BackgroundParams& bg, double eps, double delta, double delta0);
    static MultiplierParams defaults(const BackgroundParams& bg);
    /// Ablation hook: prescribes alpha directly, without the alpha < 5 check.
    static MultiplierParams with_alpha(const BackgroundParams& bg, double eps, double delta, double alpha);

    double x_break_low() const { return -1.0 / eps; }
};

/// a and its first three derivatives at one point.
struct ADerivatives {
    double a = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
};

/// Evaluate one piece's formula (analytically continued past its interval).
ADerivatives a_piece(double x, APiece piece, const MultiplierParams& mp);

/// The piece that owns x. At a breakpoint the side decides; with Side::none
/// the piece to the right is returned.
APiece a_piece_at(double x, const MultiplierParams& mp, Side side = Side::none);

/// a^{(order)}(x), order in {0,1,2,3}. At a breakpoint where that derivative
/// is discontinuous a side must be given (DomainError otherwise).
double a_eval(double x, int order, const MultiplierParams& mp, Side side = Side::none);

double g_eval(const Radius& x, const BackgroundParams& bg);
double g_eval(double r, const BackgroundParams& bg);
double g_prime(const Radius& x, const BackgroundParams& bg);

/// l(g), closed form.
double l_of_g(const Radius& x, const BackgroundParams& bg);
/// l(K r^{-(d+2)} h), closed form.
double l_of_h_term(const Radius& x, const BackgroundParams& bg);

/// The a-dependent part of l(f), split into its a', a'' and a''' terms.
struct LfATerms {
    double with_a1 = 0.0;
    double with_a2 = 0.0;
    double with_a3 = 0.0;
    double sum() const { return with_a1 + with_a2 + with_a3; }
};
LfATerms l_of_a_terms(const Radius& x, const BackgroundParams& bg, const ADerivatives& ad);

struct OracleOptions {
    /// Step in ln(r - r_s) for each nested derivative; 0 picks oracle_step().
    double log_step = 0.0;
};

/// Default oracle step at x: large where everything is smooth in
/// ln(r - r_s) (close to the horizon), small once r - r_s ~ r_s.
double oracle_step(const Radius& x, const BackgroundParams& bg);

/// How far (in ln(r - r_s)) the oracle stencil reaches on either side.
double oracle_reach(double log_step);

/// l(w) by nested finite differences of the defining formula. Steps are
/// uniform in ln(r - r_s), i.e. proportional to the local h spacing.
double l_operator_oracle(const std::function<double(const Radius&)>& w, const Radius& x,
                         const BackgroundParams& bg, const OracleOptions& opt = {});

/// Same, with w sampled in extended precision as a function of r - r_s.
/// Close to the horizon l(w) is O(1) while the nested quantities shrink
/// like r - r_s, so double samples of w limit the oracle to ~1e-5.
double l_operator_oracle(const std::function<long double(long double)>& w_of_gap, const Radius& x,
                         const BackgroundParams& bg, const OracleOptions& opt = {});

/// Values of f, f' and l(f) tabulated on a grid.
struct ProfileTable {
    std::vector<double> f;
    std::vector<double> f_prime;
    std::vector<double> l_f;
};

class MultiplierProfile {
public:
    MultiplierProfile(const BackgroundParams& bg, const MultiplierParams& mp);

    const BackgroundParams& background() const { return bg_; }
    const MultiplierParams& params() const { return mp_; }
    /// K = (d+2)/(d+3) r_ps r_s^{d+1}.
    double weight() const { return weight_; }

    Region region(const Radius& x, Side side = Side::none) const;
    APiece piece(const Radius& x, Side side = Side::none) const;

    double f(const Radius& x) const;
    double f(double r) const;
    double f_prime(const Radius& x) const;
    double f_prime(double r) const;

    double f_on_piece(const Radius& x, APiece piece) const;
    double f_prime_on_piece(const Radius& x, APiece piece) const;
    /// f on one piece in extended precision, as a function of r - r_s.
    long double f_on_piece_extended(long double gap, APiece piece) const;

    /// Region-appropriate closed form of l(f). At a breakpoint the side
    /// must be given.
    double l_f_closed(const Radius& x, Side side = Side::none) const;
    double l_f_closed(double r, Side side = Side::none) const;
    double l_f_on_piece(const Radius& x, APiece piece) const;

    /// f''(r_{-1/eps}^-) - f''(r_{-1/eps}^+).
    double f_second_jump() const;

    /// Evaluates f, f', l(f) on every grid point; exact breakpoints take
    /// the value from above.
    ProfileTable tabulate(const RadialGrid& grid) const;

    /// True if the oracle stencil around x (widened by `margin`) stays
    /// inside one piece of a.
    bool oracle_interior(const Radius& x, double margin = 1.2) const;

private:
    bool at_break(double x, double xb) const;

    BackgroundParams bg_;
    MultiplierParams mp_;
    double weight_;
};

}  // namespace lemult
