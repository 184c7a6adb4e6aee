#pragma once

#include <functional>
#include <vector>

namespace kconf {

using ScalarFn = std::function<double(double)>;

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    int evaluations = 0;
    bool converged = false;
};

// Globally adaptive Gauss-Kronrod 7/15 quadrature: the interval with the
// largest error estimate is bisected until the summed estimate drops below
// max(abs_tol, rel_tol*|I|) or the subdivision limit is hit.
QuadResult integrate_gk15(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                          int max_intervals = 4000);

// Newton with bisection fallback on a sign-changing bracket [lo, hi]. Stops
// when |f| <= f_tol or the bracket is narrower than x_tol.
double safeguarded_newton(const ScalarFn& f, const ScalarFn& df, double lo, double hi, double x_tol, double f_tol,
                          int max_iter = 200);

// Bracketed root by TOMS 748 (Boost). Throws NoBracket if f(lo), f(hi) have the same sign.
double bracketed_root(const ScalarFn& f, double lo, double hi, double x_tol);

// Value at x=0 of the interpolating polynomial through (xs[i], ys[i]).
double neville_at_zero(const std::vector<double>& xs, const std::vector<double>& ys);

// Golden-section minimum of f on [lo, hi].
double golden_minimize(const ScalarFn& f, double lo, double hi, double x_tol);

}  // namespace kconf
