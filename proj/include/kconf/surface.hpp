#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kconf/circlefield.hpp"
#include "kconf/conjugacy.hpp"
#include "kconf/funcspace.hpp"

namespace kconf {

// ---------------------------------------------------------------------------
// Strips and the right-angled Coxeter group they generate

struct Strip {
    double lo = 0, hi = 0;  // open interval (lo, hi); the last strip wraps past P
    int sign = 0;           // sign of f on the strip
};

struct StripDecomposition {
    double period = 0;
    std::vector<ZeroData> zeros;               // over one period, ascending
    std::vector<Strip> strips;                 // strip i = (z_i, z_{i+1})
    std::vector<std::pair<int, int>> contiguity;  // unordered pairs (a < b), sorted, no repeats
};

// Labels strips 0..n-1 starting from the zero at index 0. Adjacent strips are
// contiguous when the zero between them is simple. Throws NoZeros.
StripDecomposition strip_decomposition(const PeriodicFunction& f);

using CoxeterWord = std::vector<int>;

// Generators 0..n-1, all involutions; s and t commute iff commute(s, t).
class CoxeterSystem {
public:
    explicit CoxeterSystem(int generators, const std::vector<std::pair<int, int>>& commuting = {});
    explicit CoxeterSystem(const StripDecomposition& c) : CoxeterSystem(static_cast<int>(c.strips.size()), c.contiguity) {}

    int size() const { return n_; }
    bool commute(int s, int t) const { return s == t || table_[static_cast<std::size_t>(s * n_ + t)]; }

private:
    int n_;
    std::vector<char> table_;
};

// Shortlex normal form: free cancellation of a letter against an earlier copy
// that it commutes past, then the lexicographically least commutation-equivalent
// arrangement. Throws UnknownGenerator.
CoxeterWord word_normal_form(const CoxeterWord& w, const CoxeterSystem& g);

// All normal forms of length <= radius, shortlex ordered. radius must be in
// [0, 12]; throws BudgetExceeded once more than max_words words are produced.
std::vector<CoxeterWord> enumerate_charts(const CoxeterSystem& g, int radius, std::size_t max_words = 2'000'000);

// ---------------------------------------------------------------------------
// Saddles

// theta on w = uv for the symmetric saddle 2 theta(uv) du dv extending a
// domino, in the gauge theta(0) = 1 (u'(0) = -1).
class SaddleProfile {
public:
    double operator()(double w) const;  // throws OutOfRange outside [w_min, w_max]
    double derivative(double w) const;
    double w_min() const { return w_.front(); }
    double w_max() const { return w_.back(); }

    // f_hat(t) = A^2 f(t / A + z) with A = 2 / f'(z), so f_hat(0) = 0, f_hat'(0) = 2.
    double A = 1.0;
    double z = 0.0;
    std::string gauge = "theta(0)=1, u'(0)=-1";

    std::vector<double> t, u;  // samples of the defining geodesic u' = 2u / f_hat
    double t_lo = 0, t_hi = 0;
    double residual = 0;       // max |f_hat(t) + 2 u theta(u)| / max|f_hat| at off-grid points

    const std::vector<double>& w() const { return w_; }
    const std::vector<double>& theta() const { return theta_; }

private:
    friend SaddleProfile saddle_profile(const Profile&, double, double);
    std::vector<double> w_, theta_, dtheta_;
    std::shared_ptr<const std::function<std::pair<double, double>(double)>> spline_;
};

// Profile already normalized: f_hat(0) = 0, f_hat'(0) = 2, no other zero in [t_lo, t_hi].
SaddleProfile saddle_profile(const Profile& fhat, double t_lo, double t_hi);

// Normalizes at z and solves out to 95% of the distance to the neighbouring zeros.
SaddleProfile saddle_profile(const PeriodicFunction& f, const ZeroData& z);

// Phi(x, y) = (psi(y) e^{lambda x / 2}, e^{-lambda x / 2}) with psi the linearizing
// chart at z (psi'(z) = 1). Pulls the saddle metric 2 theta_S(uv) du dv back to
// f(y) dx^2 + 2 dx dy, where theta_S(w) = -(2/lambda) theta(-(2/lambda) w).
class DominoEmbedding {
public:
    DominoEmbedding(const PeriodicFunction& f, const ZeroData& z);

    double lambda() const { return lambda_; }
    double zero() const { return z_; }
    double domino_lo() const { return lo_; }
    double domino_hi() const { return hi_; }

    std::array<double, 2> operator()(double x, double y) const;  // OutOfDomino outside (lo, hi)
    double theta_saddle(double w) const;
    const SaddleProfile& profile() const { return *profile_; }

    // max |pulled back metric - (f dx^2 + 2 dx dy)| / max(1, |f(y)|) by central differences.
    double pullback_residual(double x, double y, double step = 1e-5) const;

private:
    PeriodicFunction f_;
    double z_, lambda_, lo_, hi_;
    std::shared_ptr<const ZeroChart> chart_;
    std::shared_ptr<const SaddleProfile> profile_;
};

inline DominoEmbedding embed_domino(const PeriodicFunction& f, const ZeroData& z) { return DominoEmbedding(f, z); }

// ---------------------------------------------------------------------------
// Tori

struct TorusModel {
    // Throws InvalidArgument unless f changes sign, P is a multiple of the
    // fundamental period, L > 0 and the twist is finite.
    TorusModel(PeriodicFunction f, double P, double orbit_length, double twist, bool reeb);

    PeriodicFunction f;
    double P;
    double orbit_length;
    double twist;
    bool reeb;
};

CircleField torus_invariant(const TorusModel& T);

struct TorusComparison {
    std::optional<MatchCertificate> direct;
    std::optional<CoverMatch> finite_cover;
    bool same_model_isometric = false;
};

// Orientation reversal is allowed throughout: the tori are compared up to any diffeomorphism.
TorusComparison tori_K_conformal(const TorusModel& T, const TorusModel& T2, int kmax = 64);

struct ReebClassification {
    std::optional<double> b;
    MehidiReport mehidi;
    std::optional<CpMatch> match;
};

// Throws NotReeb unless T.reeb.
ReebClassification classify_reeb_mehidi(const TorusModel& T);

}  // namespace kconf
