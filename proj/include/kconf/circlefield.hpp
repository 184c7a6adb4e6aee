#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kconf/funcspace.hpp"

namespace kconf {

// scale * X_{f,P}: the field f d/dy on R/PZ, multiplied by scale.
class CircleField {
public:
    // P must be an integer multiple k of the fundamental period of f (k <= max_cover).
    // Throws NonHyperbolic if f has a non-simple zero.
    CircleField(PeriodicFunction f, double P, double scale = 1.0, int max_cover = 100000);
    explicit CircleField(PeriodicFunction f) : CircleField(f, f.period()) {}

    const PeriodicFunction& function() const { return f_; }
    double period() const { return period_; }
    double scale() const { return scale_; }
    double fundamental_period() const { return p0_; }
    int cover() const { return cover_; }  // P / P0

    // Zeros of f in [0, P0) and in [0, P); lambdas are f'(z), without the scale.
    const std::vector<ZeroData>& base_zeros() const { return base_zeros_; }
    std::vector<ZeroData> zeros() const;

    // Value of scale * f.
    double value(double y) const { return scale_ * f_(y); }

private:
    PeriodicFunction f_;
    double period_;
    double scale_;
    double p0_;
    int cover_;
    std::vector<ZeroData> base_zeros_;
};

struct InvariantList {
    int n = 0;
    std::vector<double> lambdas;  // cyclic, starting at the smallest zero in [0, P)
    double mu = 0.0;
    double period = 0.0;
    double fundamental_period = 0.0;
};

// Y matches a*X: lambda'_k = a * src_{(k + shift) mod n}, mu' = mu_src / a, where
// src is the list of X, or of the reflected field -f(-y) when reversed is set.
struct MatchCertificate {
    double a = 1.0;
    int shift = 0;
    bool reversed = false;
    int kf = 1;
    int kg = 1;
};

struct MatchTolerances {
    double lambda_rel = 1e-7;
    double mu_rel = 1e-7;  // |mu' - mu/a| <= mu_rel (1 + |mu'|)
};

// Regularized integral of 1/(scale f) over the circle by pole subtraction.
double mu(const CircleField& X);

// The literal epsilon-limit: sums of integrals of 1/f that avoid eps-balls
// around the zeros, extrapolated to eps = 0. Independent of mu().
double mu_bruteforce(const CircleField& X, const std::vector<double>& eps_list = {1e-2, 1e-3, 1e-4, 1e-5});

InvariantList invariant_list(const CircleField& X);

// List of the field pushed forward by y -> -y: lambda_k -> lambda_{-k}, mu -> -mu.
InvariantList reversed_list(const InvariantList& L);

// Sum over the cycle of 1/lambda_{i+1} - 1/lambda_i (zero up to rounding).
double telescoping_defect(const InvariantList& L);

std::optional<MatchCertificate> match_invariants(const InvariantList& source, const InvariantList& target,
                                                 bool allow_scale, bool allow_reversal,
                                                 const MatchTolerances& tol = {});

std::optional<MatchCertificate> equivalent(const CircleField& X, const CircleField& Y, bool allow_scale,
                                           bool allow_reversal, const MatchTolerances& tol = {});

struct CoverMatch {
    double P = 0.0;
    double Q = 0.0;
    MatchCertificate cert;
};

struct CoverOptions {
    int kmax = 64;
    bool allow_reversal = false;
    long node_limit = 50'000'000;  // shift comparisons
};

// Searches covers P = kf * period(f), Q = kg * period(g) with n_f kf = n_g kg,
// ordered by kf + kg, then kf, for X_{f,P} equivalent to a X_{g,Q}.
std::optional<CoverMatch> finite_cover_conformal(const PeriodicFunction& f, const PeriodicFunction& g,
                                                 const CoverOptions& opt = {});

struct MehidiReport {
    std::optional<double> lambda;     // common |f'(z)| if the condition holds
    std::vector<double> multipliers;  // f'(z_i) over the declared period
    double spread = 0.0;              // max_i ||lambda_i| - mean| / mean
};

MehidiReport is_mehidi(const PeriodicFunction& f, double tol = 1e-8);

// The Clifton-Pohl family sin(y)(1 + b sin(y)) on period 2 pi.
PeriodicFunction cp_function(double b);

double mu_cp(double b, int k);

struct CpMatch {
    double b = 0.0;
    int k = 1;
    double a = 1.0;
};

// X_{f,P} equivalent to a X_{f_b, 2 k pi} with a > 0. Throws NotMehidi,
// NoBracket (message carries the attained mu range), NotMonotone.
std::optional<CpMatch> match_to_cp(const PeriodicFunction& f, double P);

}  // namespace kconf
