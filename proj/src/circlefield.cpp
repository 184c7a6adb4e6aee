#include "kconf/circlefield.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kconf/errors.hpp"
#include "kconf/numerics.hpp"

namespace kconf {

CircleField::CircleField(PeriodicFunction f, double P, double scale, int max_cover)
    : f_(std::move(f)), period_(P), scale_(scale) {
    if (scale == 0.0 || !std::isfinite(scale)) throw InvalidArgument("field scale must be finite and nonzero");
    if (!(P > 0.0) || !std::isfinite(P)) throw InvalidArgument("field period must be positive");
    p0_ = kconf::fundamental_period(f_);
    const double ratio = P / p0_;
    const double k = std::round(ratio);
    if (k < 1 || std::abs(ratio - k) > 1e-9 * k || k > max_cover) {
        std::ostringstream msg;
        msg << "period " << P << " is not a multiple k <= " << max_cover << " of the fundamental period " << p0_;
        throw InvalidArgument(msg.str());
    }
    cover_ = static_cast<int>(k);
    ZeroOptions zo;
    zo.require_hyperbolic = true;
    for (const ZeroData& z : find_zeros(f_, zo)) {
        if (z.z < p0_ * (1.0 - 1e-12)) base_zeros_.push_back(z);
    }
}

std::vector<ZeroData> CircleField::zeros() const {
    std::vector<ZeroData> out;
    out.reserve(base_zeros_.size() * cover_);
    for (int j = 0; j < cover_; ++j) {
        for (ZeroData z : base_zeros_) {
            z.z += j * p0_;
            out.push_back(z);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct PoleCoefficients {
    double c0, c1;  // 1/f - 1/(lambda s) = c0 + c1 s + O(s^2), s = y - z
};

PoleCoefficients pole_coefficients(const PeriodicFunction& f, const ZeroData& z) {
    const double l = z.lambda;
    const double a = f.d2(z.z) / 2.0;
    const double b = f.d3(z.z) / 6.0;
    return {-a / (l * l), a * a / (l * l * l) - b / (l * l)};
}

// Regularized integral over (zl, zr) of 1/f with both first-order poles removed,
// plus the log terms that the removal leaves behind.
double regularized_piece(const PeriodicFunction& f, const ZeroData& zl, const ZeroData& zr, double right_z) {
    const double left_z = zl.z;
    const double delta = right_z - left_z;
    const double ll = zl.lambda, lr = zr.lambda;
    const PoleCoefficients pl = pole_coefficients(f, zl);
    const PoleCoefficients pr = pole_coefficients(f, zr);
    // Inside this radius rounding in 1/f (~eps/f^2) beats the O(s^2) Taylor remainder.
    const double taylor = 1e-4 * delta;
    auto r = [&](double t) {
        const double s = t - left_z;
        const double u = t - right_z;
        if (s < taylor) return pl.c0 + pl.c1 * s - 1.0 / (lr * u);
        if (-u < taylor) return pr.c0 + pr.c1 * u - 1.0 / (ll * s);
        return 1.0 / f(t) - 1.0 / (ll * s) - 1.0 / (lr * u);
    };
    const QuadResult q = integrate_gk15(r, left_z, right_z, 1e-11, 1e-12, 4000);
    if (!q.converged && q.error > 1e-10 * std::max(1.0, std::abs(q.value))) {
        throw NumericalStall("pole-subtracted quadrature did not converge on (" + std::to_string(left_z) + ", " +
                             std::to_string(right_z) + ")");
    }
    return q.value + (1.0 / ll - 1.0 / lr) * std::log(delta);
}

}  // namespace

double mu(const CircleField& X) {
    const auto& zs = X.base_zeros();
    if (zs.empty()) throw NoZeros("mu: f has constant sign");
    const std::size_t m = zs.size();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const ZeroData& zl = zs[i];
        const ZeroData& zr = zs[(i + 1) % m];
        const double right = (i + 1 < m) ? zr.z : zr.z + X.fundamental_period();
        total += regularized_piece(X.function(), zl, zr, right);
    }
    return X.cover() * total / X.scale();
}

double mu_bruteforce(const CircleField& X, const std::vector<double>& eps_list) {
    if (eps_list.size() < 4) throw BadEpsSequence("need at least 4 epsilon values");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0) || (i > 0 && !(eps_list[i] < eps_list[i - 1])))
            throw BadEpsSequence("epsilon values must be positive and strictly decreasing");
    }
    const auto zs = X.zeros();
    if (zs.empty()) throw NoZeros("mu_bruteforce: f has constant sign");
    const double P = X.period();
    const std::size_t n = zs.size();
    double min_gap = P;
    for (std::size_t i = 0; i < n; ++i) {
        const double right = (i + 1 < n) ? zs[i + 1].z : zs[0].z + P;
        min_gap = std::min(min_gap, right - zs[i].z);
    }
    if (!(2.0 * eps_list.front() < min_gap))
        throw BadEpsSequence("largest epsilon must be below half the smallest gap between zeros");

    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const PeriodicFunction& f = X.function();
    auto inv = [&f](double t) { return 1.0 / f(t); };
    // Each piece is mapped onto [-1, 1] first: Boost 1.74's recursion compares the
    // unscaled error with a scaled tolerance, which never terminates early on short pieces.
    auto piece = [&](double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        return GK::integrate([&](double x) { return h * inv(c + h * x); }, -1.0, 1.0, 10, 1e-13);
    };

    std::vector<double> sums;
    for (double eps : eps_list) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = zs[i].z;
            const double hi = (i + 1 < n) ? zs[i + 1].z : zs[0].z + P;
            const double mid = 0.5 * (lo + hi);
            // Geometric pieces resolve the 1/s growth toward each end.
            double w = eps;
            while (lo + 2 * w < mid) {
                s += piece(lo + w, lo + 2 * w) + piece(hi - 2 * w, hi - w);
                w *= 2;
            }
            s += piece(lo + w, mid) + piece(mid, hi - w);
        }
        sums.push_back(s);
    }
    return neville_at_zero(eps_list, sums) / X.scale();
}

InvariantList invariant_list(const CircleField& X) {
    InvariantList L;
    const auto zs = X.zeros();
    if (zs.empty()) throw NoZeros("invariant_list: f has constant sign");
    L.n = static_cast<int>(zs.size());
    for (const ZeroData& z : zs) L.lambdas.push_back(X.scale() * z.lambda);
    L.mu = mu(X);
    L.period = X.period();
    L.fundamental_period = X.fundamental_period();
    return L;
}

InvariantList reversed_list(const InvariantList& L) {
    InvariantList R = L;
    for (int k = 0; k < L.n; ++k) R.lambdas[k] = L.lambdas[(L.n - k) % L.n];
    R.mu = -L.mu;
    return R;
}

double telescoping_defect(const InvariantList& L) {
    double s = 0.0;
    for (int i = 0; i < L.n; ++i) s += 1.0 / L.lambdas[(i + 1) % L.n] - 1.0 / L.lambdas[i];
    return s;
}

namespace {

bool matches_at(const InvariantList& src, const InvariantList& tgt, int shift, double a, const MatchTolerances& tol) {
    for (int k = 0; k < tgt.n; ++k) {
        const double expect = a * src.lambdas[(k + shift) % src.n];
        if (std::abs(tgt.lambdas[k] - expect) > tol.lambda_rel * std::abs(tgt.lambdas[k])) return false;
    }
    return std::abs(tgt.mu - src.mu / a) <= tol.mu_rel * (1.0 + std::abs(tgt.mu));
}

}  // namespace

std::optional<MatchCertificate> match_invariants(const InvariantList& source, const InvariantList& target,
                                                 bool allow_scale, bool allow_reversal, const MatchTolerances& tol) {
    if (source.n != target.n || source.n == 0) return std::nullopt;
    const InvariantList rev = reversed_list(source);
    for (int s = 0; s < source.n; ++s) {
        for (int r = 0; r < (allow_reversal ? 2 : 1); ++r) {
            const InvariantList& src = r ? rev : source;
            const double a = allow_scale ? target.lambdas[0] / src.lambdas[s] : 1.0;
            if (matches_at(src, target, s, a, tol)) {
                MatchCertificate c;
                c.a = a;
                c.shift = s;
                c.reversed = r == 1;
                return c;
            }
        }
    }
    return std::nullopt;
}

std::optional<MatchCertificate> equivalent(const CircleField& X, const CircleField& Y, bool allow_scale,
                                           bool allow_reversal, const MatchTolerances& tol) {
    auto c = match_invariants(invariant_list(X), invariant_list(Y), allow_scale, allow_reversal, tol);
    if (c) {
        c->kf = X.cover();
        c->kg = Y.cover();
    }
    return c;
}

namespace {

InvariantList cover_list(const InvariantList& base, int k) {
    InvariantList L = base;
    L.n = base.n * k;
    L.lambdas.clear();
    for (int j = 0; j < k; ++j) L.lambdas.insert(L.lambdas.end(), base.lambdas.begin(), base.lambdas.end());
    L.mu = k * base.mu;
    L.period = k * base.period;
    return L;
}

}  // namespace

std::optional<CoverMatch> finite_cover_conformal(const PeriodicFunction& f, const PeriodicFunction& g,
                                                 const CoverOptions& opt) {
    if (opt.kmax < 1) throw InvalidArgument("kmax must be positive");
    const InvariantList lf = invariant_list(CircleField(f));
    const InvariantList lg = invariant_list(CircleField(g));

    std::vector<std::pair<int, int>> pairs;
    long nodes = 0;
    for (int kf = 1; kf <= opt.kmax; ++kf) {
        if ((static_cast<long>(lf.n) * kf) % lg.n != 0) continue;
        const long kg = static_cast<long>(lf.n) * kf / lg.n;
        if (kg < 1 || kg > opt.kmax) continue;
        pairs.emplace_back(kf, static_cast<int>(kg));
        nodes += static_cast<long>(lf.n) * kf * (opt.allow_reversal ? 2 : 1);
        if (nodes > opt.node_limit)
            throw BudgetExceeded("cover search needs more than " + std::to_string(opt.node_limit) +
                                 " shift comparisons; lower kmax or raise the node limit");
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
        if (x.first + x.second != y.first + y.second) return x.first + x.second < y.first + y.second;
        return x.first < y.first;
    });
    for (const auto& [kf, kg] : pairs) {
        auto c = match_invariants(cover_list(lf, kf), cover_list(lg, kg), true, opt.allow_reversal);
        if (c) {
            c->kf = kf;
            c->kg = kg;
            return CoverMatch{kf * f.period(), kg * g.period(), *c};
        }
    }
    return std::nullopt;
}

MehidiReport is_mehidi(const PeriodicFunction& f, double tol) {
    ZeroOptions zo;
    zo.require_hyperbolic = true;
    const auto zs = find_zeros(f, zo);
    if (zs.empty()) throw NoZeros("is_mehidi: f has constant sign");
    MehidiReport rep;
    double mean = 0.0;
    for (const ZeroData& z : zs) {
        rep.multipliers.push_back(z.lambda);
        mean += std::abs(z.lambda);
    }
    mean /= static_cast<double>(zs.size());
    for (const ZeroData& z : zs) rep.spread = std::max(rep.spread, std::abs(std::abs(z.lambda) - mean) / mean);
    if (rep.spread <= tol) rep.lambda = mean;
    return rep;
}

PeriodicFunction cp_function(double b) {
    const Expr y = Expr::variable("y");
    return PeriodicFunction::create(sin(y) * (Expr::constant(1.0) + Expr::constant(b) * sin(y)),
                                    2.0 * std::numbers::pi);
}

double mu_cp(double b, int k) {
    if (!(std::abs(b) < 1.0 - 1e-6)) throw OutOfRange("mu_cp: need |b| < 1 - 1e-6");
    if (k < 1) throw InvalidArgument("mu_cp: k must be positive");
    return k * mu(CircleField(cp_function(b)));
}

namespace {

constexpr double kCpDelta = 1e-4;
constexpr int kCpGrid = 101;

struct CpTable {
    std::vector<double> b, mu;
    bool increasing = false;
};

const CpTable& cp_table() {
    static const CpTable table = [] {
        CpTable t;
        for (int j = 0; j < kCpGrid; ++j) {
            const double b = -1.0 + kCpDelta + j * (2.0 - 2.0 * kCpDelta) / (kCpGrid - 1);
            t.b.push_back(b);
            t.mu.push_back(mu_cp(b, 1));
        }
        t.increasing = t.mu.back() > t.mu.front();
        for (int j = 1; j < kCpGrid; ++j) {
            if ((t.mu[j] > t.mu[j - 1]) != t.increasing || t.mu[j] == t.mu[j - 1])
                throw NotMonotone("b -> mu_cp(b, 1) is not strictly monotone on the scan grid");
        }
        return t;
    }();
    return table;
}

}  // namespace

std::optional<CpMatch> match_to_cp(const PeriodicFunction& f, double P) {
    const CircleField X(f, P);
    const InvariantList L = invariant_list(X);
    double mean = 0.0;
    for (double l : L.lambdas) mean += std::abs(l);
    mean /= L.n;
    double spread = 0.0;
    for (double l : L.lambdas) spread = std::max(spread, std::abs(std::abs(l) - mean) / mean);
    if (spread > 1e-7) {
        std::ostringstream msg;
        msg << "multipliers do not share a common |lambda| (relative spread " << spread << ")";
        throw NotMehidi(msg.str());
    }
    CpMatch m;
    m.a = mean;
    m.k = L.n / 2;
    const double target = m.a * L.mu / m.k;

    const CpTable& t = cp_table();
    const double lo = std::min(t.mu.front(), t.mu.back());
    const double hi = std::max(t.mu.front(), t.mu.back());
    if (!(target >= lo && target <= hi)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "target mu " << target << " outside attained range [" << lo << ", " << hi << "]";
        throw NoBracket(msg.str());
    }
    int cell = 0;
    for (int j = 0; j + 1 < kCpGrid; ++j) {
        const double m0 = t.mu[j], m1 = t.mu[j + 1];
        if ((target - m0) * (target - m1) <= 0.0) {
            cell = j;
            break;
        }
    }
    auto g = [target](double b) { return mu_cp(b, 1) - target; };
    m.b = bracketed_root(g, t.b[cell], t.b[cell + 1], 1e-10);

    const CircleField model(cp_function(m.b), 2.0 * m.k * std::numbers::pi, m.a);
    if (!equivalent(model, X, false, false)) return std::nullopt;
    return m;
}

}  // namespace kconf
