#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <vector>

#include "kconf/circlefield.hpp"
#include "kconf/funcspace.hpp"

namespace kconf {

// Integral curve of y' = f(y) at time t (DOPRI5, local tolerance 1e-12).
// Zeros are fixed points. Throws NumericalStall if the step size underflows.
double flow(const PeriodicFunction& f, double y0, double t);

// int_{y_ref}^{y} ds / f(s). Throws CrossesZero if a zero of f lies strictly
// between the two points, DomainError if either point is itself a zero.
double time_integral(const PeriodicFunction& f, double y_ref, double y);

struct ZeroChartTable;

// Linearizing chart at a simple zero z with lambda = f'(z):
//   psi(y) = (y - z) exp(lambda H(y)),  H(y) = int_z^y (1/f(s) - 1/(lambda (s - z))) ds,
// so psi' f = lambda psi and psi'(z) = 1. Valid on the open interval between the
// neighbouring zeros; accurate on the half nearer to z.
class ZeroChart {
public:
    ZeroChart() = default;
    // lo < z < hi bound the interval where f has no other zero.
    ZeroChart(Profile f, double z, double lambda, double lo, double hi);
    // An end that is not a zero may be approached all the way; H is tabulated up to it.
    ZeroChart(Profile f, double z, double lambda, double lo, double hi, bool lo_is_zero, bool hi_is_zero);

    double zero() const { return z_; }
    double lambda() const { return lambda_; }

    double h(double y) const;        // integrand of H, continuous at z
    double H(double y) const;        // int_z^y h
    double log_abs(double y) const;  // ln|psi(y)|
    double value(double y) const;    // psi(y)
    double derivative(double y) const;
    // 1 + lambda (y - z) h(y) = lambda (y - z) / f(y), well defined at z.
    double stretch(double y) const;

    // Solves ln|psi(z + sigma e^u)| = L for u <= u_max (sigma = +-1); returns u.
    double solve_log(double L, int sigma, double u_max) const;

private:
    Profile f_{Expr::constant(1.0)};
    double z_ = 0, lambda_ = 1, lo_ = 0, hi_ = 0;
    double c0_ = 0, c1_ = 0, taylor_ = 0;
    std::shared_ptr<const ZeroChartTable> table_;
};

// Charts at all zeros of f over one period P plus the strip-time constants.
// Strip i is (zero(i), zero(i+1)); indices are lifted to all integers with
// zero(i + n) = zero(i) + P. Strip time tau_i(y) = int_{m_i}^y ds/f with m_i
// the strip midpoint; on the half near zero(i),
//   tau_i = ln|psi_i| / lambda_i + alpha_i, and near zero(i+1)
//   tau_i = ln|psi_{i+1}| / lambda_{i+1} + beta_i.
// Summing beta_i - alpha_i over the cycle gives mu.
class StripAtlas {
public:
    StripAtlas(const PeriodicFunction& f, double P);
    explicit StripAtlas(const CircleField& X) : StripAtlas(X.function(), X.period()) {}

    int size() const { return n_; }
    double period() const { return period_; }
    const PeriodicFunction& function() const { return f_; }

    double zero(long i) const;
    double lambda(long i) const { return charts_[wrap(i)].lambda(); }
    double midpoint(long i) const;
    double alpha(long i) const { return alpha_[wrap(i)]; }
    double beta(long i) const { return beta_[wrap(i)]; }

    // Chart of zero i, evaluated in lifted coordinates.
    double chart_log_abs(long i, double y) const;
    double chart_H(long i, double y) const;
    double chart_stretch(long i, double y) const;

    // ln|psi_i(y)| for y in (zero(i-1), zero(i+1)), using the neighbour's chart on far halves.
    double log_abs_psi(long i, double y) const;

    // Strip index i in [0, n) and lift count k with y - k P in [zero(i), zero(i+1)).
    long locate(double y, long& k) const;

    double strip_time(long i, double y) const;

    struct Inverse {
        double y;        // point in strip i with strip_time = T
        long chart;      // zero index whose chart was used
        double log_s;    // ln|y - zero(chart)|
        int sigma;       // sign of y - zero(chart)
        double stretch;  // chart stretch at y
    };
    Inverse strip_time_inverse(long i, double T) const;

    // Chart quantities at y in strip i from the half-appropriate chart.
    struct Local {
        long chart;
        double log_s;
        int sigma;
        double stretch;
        double log_abs_psi;
    };
    Local local(long i, double y) const;

    double mu() const;

private:
    std::size_t wrap(long i) const { return static_cast<std::size_t>(((i % n_) + n_) % n_); }
    long lift(long i) const { return (i >= 0) ? i / n_ : -((-i + n_ - 1) / n_); }

    PeriodicFunction f_;
    double period_;
    int n_ = 0;
    std::vector<double> z_;
    std::vector<ZeroChart> charts_;
    std::vector<double> alpha_, beta_;
};

// A numerically evaluable diffeomorphism. Circle maps are lifts to R with
// phi(y + P) = phi(y) + orientation * Q.
class DiffeoMap {
public:
    using Fn = std::function<double(double)>;

    DiffeoMap(Fn eval, Fn deriv, double lo, double hi, int orientation, double period = 0.0,
              double image_period = 0.0);

    double operator()(double y) const { return eval_(y); }
    double derivative(double y) const { return deriv_(y); }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool is_circle() const { return period_ > 0.0; }
    double period() const { return period_; }
    double image_period() const { return image_period_; }
    int orientation() const { return orientation_; }

    // Diagnostics filled by the constructors that validate their output.
    double residual = std::numeric_limits<double>::quiet_NaN();
    double closure_defect = std::numeric_limits<double>::quiet_NaN();

    // CSV rows "y,phi,dphi" at `samples` points across the domain (open interval ends excluded).
    void write_csv(std::ostream& os, int samples) const;

private:
    Fn eval_, deriv_;
    double lo_, hi_;
    int orientation_;
    double period_, image_period_;
};

enum class Side { Left, Right };

// phi = sign(y - z) exp(lambda tau(y)), tau = int_{m}^{y} ds/f with m the midpoint
// of the adjacent strip on `side`: phi' f = lambda phi, phi(z) = 0. residual is the
// relative sup of phi' f - lambda phi on the strip, 1e-3 of its width off each end.
DiffeoMap linearize_at(const PeriodicFunction& f, const ZeroData& z, Side side);

// Same for a non-periodic profile whose strip on `side` of z ends at `other`
// (a zero of f, or any point when f has no further zero).
DiffeoMap linearize_at(const Profile& f, double z, double other, Side side);

// Circle diffeomorphism phi with a_eff phi' f = g o phi, a_eff = cert.a * scale(X) / scale(Y).
// Zero i of X goes to zero (i - shift) of Y, or to zero (-i - shift) if reversed.
// Validated on a 10^4-point grid (finite-difference derivative, 1e-3 zero
// neighbourhoods excluded) to residual <= 1e-6 max|g|; throws InvalidCertificate otherwise.
DiffeoMap build_conjugacy(const CircleField& X, const CircleField& Y, const MatchCertificate& cert);

// sup over the validation grid of |a_eff phi'_FD f - g o phi| / max|g|.
double conjugacy_residual(const CircleField& X, const CircleField& Y, double a_eff, const DiffeoMap& phi,
                          int samples = 10000);

}  // namespace kconf
