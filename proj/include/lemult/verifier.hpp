#pragma once

// Grid scans of the positivity claims behind the multiplier: signs of f and
// f', the l(f) bounds region by region, the Case-3 split into p + n1 + n2 + n3,
// and the bookkeeping that absorbs the Case-1 deficits and the boundary terms
// at r_{-1/eps}.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lemult/geometry.hpp"
#include "lemult/multiplier.hpp"

namespace lemult {

enum class CaseId {
    case1,
    case2,
    case3_n1,
    case3_n2,
    case3_n3,
    case3_q,
    case3_s,
    case4_fprime,
    case4_lf,
    sign_f,
    fprime,
    budget,
};

std::string to_string(CaseId id);
std::optional<CaseId> case_from_string(const std::string& name);
/// Every case scanned by `verify`, in report order (budget excluded).
const std::vector<CaseId>& scan_cases();

struct ScanSample {
    double r;
    double value;   // the scanned expression, in its own units
    double margin;  // normalised; > 0 (or >= 0 for non-strict checks) is good
};

struct CaseVerdict {
    CaseId case_id = CaseId::case1;
    int d = 1;
    MultiplierParams params;
    std::size_t grid_size = 0;
    double min_margin = 0.0;
    double witness_r = 0.0;
    bool passed = false;
    bool strict = true;
    std::string detail;
    /// Named sub-margins (budget: slack_i, margin_ii, margin_iii).
    std::vector<std::pair<std::string, double>> sub_margins;
    std::vector<ScanSample> samples;
};

struct ScanOptions {
    /// Refinement passes; each triples the density in the lowest-margin decile.
    int refine = 0;
    bool keep_samples = true;
};

// ---------------------------------------------------------------------------
// Case-3 pieces, x = h(r) in [0, alpha]

struct Case3Polynomials {
    double p = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    double n3 = 0.0;
};

/// p, n1, n2, n3 at r in [r_ps, r_alpha]; l(f) = (d+2)/(4 r^{2d+6}) (p + n1 + n2 + n3).
Case3Polynomials case3_polynomials(const Radius& x, const BackgroundParams& bg, const MultiplierParams& mp);

double q_eval(double x, int d, double alpha);
double q_prime(double x, int d, double alpha);
/// The alpha = 5 lower bound for q'.
double q_prime_lower_bound_alpha5(double x, int d);

double s_eval(double x, int d, double alpha);
double s_prime(double x, int d, double alpha);
/// Lower bound for s' valid for 0 <= x <= 5.
double s_prime_lower_bound(double x, int d, double alpha);
/// The same bound written out for alpha = 5.
double s_prime_bound_alpha5(double x, int d);

// ---------------------------------------------------------------------------
// scans

/// Grid for one region: uniform in h for the first three, uniform in log r
/// from r_alpha to `r_far` for the last.
RadialGrid region_grid(Region region, const BackgroundParams& bg, const MultiplierParams& mp, std::size_t n,
                       double r_far_over_rs = 1e3);
/// All four region grids merged.
RadialGrid exterior_grid(const BackgroundParams& bg, const MultiplierParams& mp, std::size_t n_per_region,
                         double r_far_over_rs = 1e3);
/// Depth of the Case-1 grid below h = -1/eps, in units of h.
inline constexpr double kCase1Depth = 20.0;

/// The natural grid for a case.
RadialGrid grid_for_case(CaseId id, const BackgroundParams& bg, const MultiplierParams& mp, std::size_t n);

CaseVerdict verify_case(CaseId id, const BackgroundParams& bg, const MultiplierParams& mp, const RadialGrid& grid,
                        const ScanOptions& opt = {});

/// The budget ledger of the Case-1 chain and the r_{-1/eps} boundary terms.
CaseVerdict verify_budget(const BackgroundParams& bg, const MultiplierParams& mp, const RadialGrid& grid,
                          const ScanOptions& opt = {});

/// Cutoff used by the trace bound: 1 below r_{-1}, 0 above r_ps, cubic ramp between.
double budget_cutoff(double r, const BackgroundParams& bg);
double budget_cutoff_prime(double r, const BackgroundParams& bg);

}  // namespace lemult
