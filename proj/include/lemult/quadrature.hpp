#pragma once

// Adaptive Gauss-Kronrod (61-point) integration with an explicit accuracy
// contract: throws NumericalError when the error estimate misses both the
// absolute and the relative target.
//
// The integral is always mapped onto [-1, 1] first: the library compares the
// unscaled per-panel error against the scaled estimate, so short intervals
// would otherwise refine to max depth and report a spurious error.

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lemult/errors.hpp"

namespace lemult {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    unsigned max_depth = 15;
};

template <class F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opt = {})
{
    if (a == b) {
        return 0.0;
    }
    double err = 0.0;
    double l1 = 0.0;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto mapped = [&f, mid, half](double x) { return half * f(mid + half * x); };
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        mapped, -1.0, 1.0, opt.max_depth, opt.rel_tol, &err, &l1);
    if (!std::isfinite(value) || err > std::max(opt.abs_tol, opt.rel_tol * l1)) {
        std::ostringstream msg;
        msg << "quadrature did not converge on [" << a << ", " << b << "]: estimate " << value
            << ", error " << err;
        throw NumericalError(msg.str());
    }
    return value;
}

}  // namespace lemult
