#include "kconf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "kconf/errors.hpp"
#include "kconf/ode.hpp"

namespace kconf {

// ---------------------------------------------------------------------------
// Strips

StripDecomposition strip_decomposition(const PeriodicFunction& f) {
    StripDecomposition c;
    c.period = f.period();
    c.zeros = find_zeros(f);
    if (c.zeros.empty()) throw NoZeros("strip_decomposition: f has no zeros");
    const std::size_t n = c.zeros.size();
    std::set<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        Strip s;
        s.lo = c.zeros[i].z;
        s.hi = i + 1 < n ? c.zeros[i + 1].z : c.zeros[0].z + c.period;
        s.sign = f(0.5 * (s.lo + s.hi)) > 0 ? 1 : -1;
        c.strips.push_back(s);
        // Strip i and strip i+1 are separated by zero i+1.
        const std::size_t j = (i + 1) % n;
        if (j != i && c.zeros[j].simple)
            pairs.insert({static_cast<int>(std::min(i, j)), static_cast<int>(std::max(i, j))});
    }
    c.contiguity.assign(pairs.begin(), pairs.end());
    return c;
}

// ---------------------------------------------------------------------------
// Coxeter words

CoxeterSystem::CoxeterSystem(int generators, const std::vector<std::pair<int, int>>& commuting)
    : n_(generators), table_(static_cast<std::size_t>(generators) * static_cast<std::size_t>(generators), 0) {
    if (generators < 0) throw InvalidArgument("CoxeterSystem: negative generator count");
    for (const auto& [a, b] : commuting) {
        if (a < 0 || b < 0 || a >= n_ || b >= n_) throw UnknownGenerator("CoxeterSystem: commuting pair out of range");
        table_[static_cast<std::size_t>(a * n_ + b)] = 1;
        table_[static_cast<std::size_t>(b * n_ + a)] = 1;
    }
}

CoxeterWord word_normal_form(const CoxeterWord& w, const CoxeterSystem& g) {
    CoxeterWord r;
    for (int s : w) {
        if (s < 0 || s >= g.size()) throw UnknownGenerator("word_normal_form: generator " + std::to_string(s));
        bool cancelled = false;
        for (std::size_t j = r.size(); j-- > 0;) {
            if (r[j] == s) {
                r.erase(r.begin() + static_cast<std::ptrdiff_t>(j));
                cancelled = true;
                break;
            }
            if (!g.commute(r[j], s)) break;
        }
        if (!cancelled) r.push_back(s);
    }
    // r is reduced; pick the least letter that commutes to the front, repeatedly.
    CoxeterWord out;
    out.reserve(r.size());
    while (!r.empty()) {
        std::size_t best = r.size();
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (best < r.size() && r[i] >= r[best]) continue;
            bool movable = true;
            for (std::size_t j = 0; j < i && movable; ++j) movable = g.commute(r[j], r[i]) && r[j] != r[i];
            if (movable) best = i;
        }
        out.push_back(r[best]);
        r.erase(r.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return out;
}

std::vector<CoxeterWord> enumerate_charts(const CoxeterSystem& g, int radius, std::size_t max_words) {
    if (radius < 0 || radius > 12) throw InvalidArgument("enumerate_charts: radius must be in [0, 12]");
    std::set<CoxeterWord> seen{CoxeterWord{}};
    std::vector<CoxeterWord> layer{CoxeterWord{}}, all{CoxeterWord{}};
    for (int r = 0; r < radius; ++r) {
        std::vector<CoxeterWord> next;
        for (const CoxeterWord& w : layer)
            for (int s = 0; s < g.size(); ++s) {
                CoxeterWord v = w;
                v.push_back(s);
                v = word_normal_form(v, g);
                if (v.size() != w.size() + 1 || !seen.insert(v).second) continue;
                if (seen.size() > max_words)
                    throw BudgetExceeded("enumerate_charts: more than " + std::to_string(max_words) + " words");
                next.push_back(v);
            }
        std::sort(next.begin(), next.end());
        all.insert(all.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return all;
}

// ---------------------------------------------------------------------------
// Saddle profile

double SaddleProfile::operator()(double w) const {
    if (!(w >= w_min() && w <= w_max())) throw OutOfRange("SaddleProfile: w outside the sampled range");
    return (*spline_)(w).first;
}

double SaddleProfile::derivative(double w) const {
    if (!(w >= w_min() && w <= w_max())) throw OutOfRange("SaddleProfile: w outside the sampled range");
    return (*spline_)(w).second;
}

SaddleProfile saddle_profile(const Profile& fhat, double t_lo, double t_hi) {
    if (!(t_lo < 0 && t_hi > 0 && std::isfinite(t_lo) && std::isfinite(t_hi)))
        throw InvalidArgument("saddle_profile: need t_lo < 0 < t_hi");
    const double f1 = fhat.d1(0.0);
    if (std::abs(fhat.f(0.0)) > 1e-12 || std::abs(f1 - 2.0) > 1e-9)
        throw InvalidArgument("saddle_profile: profile must satisfy f(0) = 0, f'(0) = 2");
    const int grid = 2000;
    double fmax = 0;
    for (int k = 0; k <= 2 * grid; ++k) {
        const double t = k < grid ? t_lo * (grid - k) / grid : t_hi * (k - grid) / grid;
        const double v = fhat.f(t);
        if (t != 0.0 && !(v * t > 0)) throw CrossesZero("saddle_profile: f vanishes inside the domino");
        fmax = std::max(fmax, std::abs(v));
    }

    const double f2 = fhat.d2(0.0), f3 = fhat.d3(0.0);
    const double h0 = -f2 / 8, h1 = f2 * f2 / 32 - f3 / 24;
    // u = -t exp(int_0^t (2/f - 1/s) ds), expanded to second order in the exponent.
    auto series = [=](double t) { return -t * std::exp(2 * h0 * t + h1 * t * t); };
    const double t0p = std::min(1e-4, 0.5 * t_hi), t0m = std::min(1e-4, -0.5 * t_lo);

    using Solver = Dopri5<1>;
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-16;
    auto rhs = [&fhat](double t, const Solver::State& u, Solver::State& du) { du[0] = 2 * u[0] / fhat.f(t); };
    std::vector<Solver::Step> fwd, bwd;
    auto run = [&](double t0, double t1, std::vector<Solver::Step>& steps) {
        const auto res = Solver::integrate(rhs, t0, {series(t0)}, t1, opt, [&steps](const Solver::Step& s) {
            steps.push_back(s);
            return true;
        });
        if (res.status != OdeStatus::Completed)
            throw NumericalStall(std::string("saddle_profile: integration stopped (") + to_string(res.status) + ")");
    };
    run(t0p, t_hi, fwd);
    run(-t0m, t_lo, bwd);
    auto u_at = [&](double t) {
        if (t >= -t0m && t <= t0p) return series(t);
        const auto& steps = t > 0 ? fwd : bwd;
        // Steps are ordered away from 0 along the integration direction.
        auto it = std::lower_bound(steps.begin(), steps.end(), t, [](const Solver::Step& s, double x) {
            return s.t1 > 0 ? s.t1 < x : s.t1 > x;
        });
        if (it == steps.end()) it = steps.end() - 1;
        return it->at(t)[0];
    };

    SaddleProfile p;
    p.t_lo = t_lo;
    p.t_hi = t_hi;
    for (int k = 0; k <= 2 * grid; ++k) p.t.push_back(k < grid ? t_lo * (grid - k) / grid : t_hi * (k - grid) / grid);

    auto build = [&] {
        p.u.clear();
        p.w_.clear();
        p.theta_.clear();
        p.dtheta_.clear();
        for (double t : p.t) p.u.push_back(t == 0.0 ? 0.0 : u_at(t));
        // u decreases with t, so w = u runs backwards through the samples.
        for (std::size_t k = p.t.size(); k-- > 0;) {
            const double t = p.t[k], u = p.u[k];
            double th, dth;
            if (t == 0.0) {
                th = 1.0;
                dth = -f2 / 2;
            } else {
                const double fv = fhat.f(t);
                th = -fv / (2 * u);
                dth = (2 - fhat.d1(t)) * fv / (4 * u * u);
            }
            if (!(th > 0) || !std::isfinite(dth)) throw NumericalStall("saddle_profile: theta lost positivity");
            if (!p.w_.empty() && !(u > p.w_.back())) throw NumericalStall("saddle_profile: u is not monotone");
            p.w_.push_back(u);
            p.theta_.push_back(th);
            p.dtheta_.push_back(dth);
        }
        auto spline = std::make_shared<boost::math::interpolators::cubic_hermite<std::vector<double>>>(
            std::vector<double>(p.w_), std::vector<double>(p.theta_), std::vector<double>(p.dtheta_));
        p.spline_ = std::make_shared<const std::function<std::pair<double, double>(double)>>(
            [spline](double w) { return std::make_pair((*spline)(w), spline->prime(w)); });
    };

    // Reconstruction between the nodes; intervals that miss the target get bisected.
    // u can grow like a large power of the distance to the next zero, so a uniform
    // t grid is far too coarse in w there.
    const double target = 1e-10 * std::max(fmax, 1e-300);
    const std::size_t max_nodes = 200000;
    double worst = 0;
    for (;;) {
        build();
        worst = 0;
        std::vector<double> added;
        for (std::size_t k = 0; k + 1 < p.t.size(); ++k) {
            const double t = 0.5 * (p.t[k] + p.t[k + 1]);
            const double u = u_at(t);
            const double r = std::abs(fhat.f(t) + 2 * u * p(u));
            worst = std::max(worst, r);
            if (r > target) added.push_back(t);
        }
        if (added.empty() || p.t.size() + added.size() > max_nodes) break;
        p.t.insert(p.t.end(), added.begin(), added.end());
        std::sort(p.t.begin(), p.t.end());
    }
    p.residual = worst / std::max(fmax, 1e-300);
    return p;
}

namespace {

struct Neighbours {
    double z, lambda, prev, next;  // prev < z < next, lifted
};

Neighbours neighbours(const PeriodicFunction& f, const ZeroData& zd) {
    const auto zs = find_zeros(f);
    const double P = f.period();
    for (std::size_t i = 0; i < zs.size(); ++i) {
        double d = std::abs(zs[i].z - zd.z);
        d = std::min(d, P - d);
        if (d > 1e-9 * P) continue;
        const double lam = f.d1(zd.z);
        if (!zs[i].simple || std::abs(lam) <= 1e-8 * f.max_abs())
            throw NonSimpleZero("the zero is not simple");
        const std::size_t n = zs.size();
        // Keep the caller's lift of z.
        const double shift = zd.z - zs[i].z;
        const double prev = (i > 0 ? zs[i - 1].z : zs[n - 1].z - P) + shift;
        const double next = (i + 1 < n ? zs[i + 1].z : zs[0].z + P) + shift;
        return {zd.z, lam, prev, next};
    }
    throw NotAZero("the given point is not a zero of f");
}

}  // namespace

SaddleProfile saddle_profile(const PeriodicFunction& f, const ZeroData& zd) {
    const Neighbours nb = neighbours(f, zd);
    const double A = 2.0 / nb.lambda;
    const PeriodicFunction fhat = class_transform(f, A, nb.z);
    const double dp = nb.z - nb.prev, dn = nb.next - nb.z;
    const double t_hi = 0.95 * std::abs(A) * (A > 0 ? dn : dp);
    const double t_lo = -0.95 * std::abs(A) * (A > 0 ? dp : dn);
    SaddleProfile p = saddle_profile(fhat.profile(), t_lo, t_hi);
    p.A = A;
    p.z = nb.z;
    return p;
}

// ---------------------------------------------------------------------------
// Domino embedding

DominoEmbedding::DominoEmbedding(const PeriodicFunction& f, const ZeroData& zd) : f_(f) {
    const Neighbours nb = neighbours(f, zd);
    z_ = nb.z;
    lambda_ = nb.lambda;
    lo_ = nb.prev;
    hi_ = nb.next;
    chart_ = std::make_shared<const ZeroChart>(f.profile(), z_, lambda_, lo_, hi_);
    profile_ = std::make_shared<const SaddleProfile>(saddle_profile(f, zd));
}

std::array<double, 2> DominoEmbedding::operator()(double x, double y) const {
    if (!(y > lo_ && y < hi_) || !std::isfinite(x)) throw OutOfDomino("embed_domino: point outside the domino");
    const double e = std::exp(0.5 * lambda_ * x);
    return {chart_->value(y) * e, 1.0 / e};
}

double DominoEmbedding::theta_saddle(double w) const {
    const double A = 2.0 / lambda_;
    return -A * (*profile_)(-A * w);
}

double DominoEmbedding::pullback_residual(double x, double y, double step) const {
    const auto p = (*this)(x, y);
    const double hx = step * std::max(1.0, std::abs(x)), hy = step * std::max(1.0, std::abs(y));
    const auto xp = (*this)(x + hx, y), xm = (*this)(x - hx, y);
    const auto yp = (*this)(x, y + hy), ym = (*this)(x, y - hy);
    const double ux = (xp[0] - xm[0]) / (2 * hx), vx = (xp[1] - xm[1]) / (2 * hx);
    const double uy = (yp[0] - ym[0]) / (2 * hy), vy = (yp[1] - ym[1]) / (2 * hy);
    const double th = theta_saddle(p[0] * p[1]);
    const double gxx = 2 * th * ux * vx, gxy = th * (ux * vy + vx * uy), gyy = 2 * th * uy * vy;
    const double fy = f_(y);
    return std::max({std::abs(gxx - fy), std::abs(gxy - 1.0), std::abs(gyy)}) / std::max(1.0, std::abs(fy));
}

// ---------------------------------------------------------------------------
// Tori

TorusModel::TorusModel(PeriodicFunction f_, double P_, double L, double delta, bool reeb_)
    : f(std::move(f_)), P(P_), orbit_length(L), twist(delta), reeb(reeb_) {
    if (!(L > 0) || !std::isfinite(L)) throw InvalidArgument("TorusModel: orbit length must be positive");
    if (!std::isfinite(delta)) throw InvalidArgument("TorusModel: twist must be finite");
    bool pos = false, neg = false;
    const int grid = PeriodicFunction::kCheckGrid;
    for (int k = 0; k < grid; ++k) {
        const double v = f(f.period() * k / grid);
        pos = pos || v > 0;
        neg = neg || v < 0;
    }
    if (!(pos && neg)) throw InvalidArgument("TorusModel: f must change sign");
    const double P0 = fundamental_period(f);
    const double k = std::round(P / P0);
    if (!(k >= 1) || std::abs(P - k * P0) > 1e-9 * P)
        throw InvalidArgument("TorusModel: P must be a multiple of the fundamental period");
}

CircleField torus_invariant(const TorusModel& T) { return CircleField(T.f, T.P); }

TorusComparison tori_K_conformal(const TorusModel& T, const TorusModel& T2, int kmax) {
    TorusComparison r;
    r.direct = equivalent(torus_invariant(T), torus_invariant(T2), true, true);
    CoverOptions opt;
    opt.kmax = kmax;
    opt.allow_reversal = true;
    r.finite_cover = finite_cover_conformal(PeriodicFunction::create(T.f.expr(), T.P),
                                            PeriodicFunction::create(T2.f.expr(), T2.P), opt);
    r.same_model_isometric = r.direct.has_value() && same_class(T.f, T2.f).has_value();
    return r;
}

ReebClassification classify_reeb_mehidi(const TorusModel& T) {
    if (!T.reeb) throw NotReeb("classify_reeb_mehidi: the torus is not Reeb");
    ReebClassification out;
    const PeriodicFunction f = PeriodicFunction::create(T.f.expr(), T.P);
    out.mehidi = is_mehidi(f);
    if (!out.mehidi.lambda) return out;
    out.match = match_to_cp(f, T.P);
    if (out.match) out.b = out.match->b;
    return out;
}

}  // namespace kconf
