#include "kconf/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kconf/errors.hpp"
#include "kconf/numerics.hpp"

namespace kconf {

Profile::Profile(const Expr& e) {
    auto impl = std::make_shared<Impl>();
    impl->e.push_back(e);
    for (int k = 0; k < 3; ++k) impl->e.push_back(differentiate(impl->e.back()));
    for (const Expr& d : impl->e) impl->c.emplace_back(d);
    impl_ = std::move(impl);
}

Profile Profile::parse(std::string_view src) { return Profile(parse_expr(src)); }

std::string Profile::variable() const {
    std::string v = expr().variable_name();
    return v.empty() ? "y" : v;
}

double parse_constant(std::string_view src) {
    const Expr e = parse_expr(src);
    if (!e.variable_name().empty())
        throw InvalidArgument("expected a constant expression, got variable '" + e.variable_name() + "'");
    return evaluate(e, 0.0);
}

PeriodicFunction PeriodicFunction::create(const Expr& e, double period) {
    if (!(period > 0.0) || !std::isfinite(period)) throw InvalidArgument("period must be positive and finite");
    Profile p(e);
    std::vector<double> base(kCheckGrid);
    double max_abs = 0.0;
    double worst = 0.0;
    double worst_at = 0.0;
    for (int j = 0; j < kCheckGrid; ++j) {
        const double y = period * j / kCheckGrid;
        double v = 0.0, w = 0.0;
        try {
            v = p.f(y);
            w = p.f(y + period);
        } catch (const DomainError& err) {
            throw DomainError(std::string("profile undefined near y=") + std::to_string(y) + ": " + err.what());
        }
        max_abs = std::max(max_abs, std::abs(v));
        if (std::abs(w - v) > worst) {
            worst = std::abs(w - v);
            worst_at = y;
        }
    }
    if (worst > 1e-10 * (1.0 + max_abs)) {
        throw NotPeriodic("|f(y+P) - f(y)| = " + std::to_string(worst) + " at y = " + std::to_string(worst_at) +
                          " exceeds 1e-10 (1 + max|f|)");
    }
    return PeriodicFunction(std::make_shared<Impl>(Impl{std::move(p), period, max_abs}));
}

PeriodicFunction PeriodicFunction::parse(std::string_view expr, std::string_view period) {
    return create(parse_expr(expr), parse_constant(period));
}

std::string PeriodicFunction::to_string() const { return kconf::to_string(expr()); }

// ---------------------------------------------------------------------------

namespace {

struct ScanResult {
    std::vector<ZeroData> zeros;
    bool hidden_pair = false;  // a dip crosses zero inside one cell: grid too coarse
};

ScanResult scan(const PeriodicFunction& f, int n, const ZeroOptions& opt) {
    const double P = f.period();
    const double h = P / n;
    const double fmax = std::max(f.max_abs(), std::numeric_limits<double>::min());
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j < n; ++j) v[j] = f(j * h);
    v[n] = v[0];

    ScanResult out;
    auto df = [&f](double y) { return f.d1(y); };
    auto fn = [&f](double y) { return f(y); };
    auto add = [&](double z, bool tangential) {
        const double lambda = f.d1(z);
        out.zeros.push_back({z, lambda, !tangential && std::abs(lambda) > opt.tau_simple});
    };

    for (int j = 0; j < n; ++j) {
        const double a = j * h, b = (j + 1) * h;
        if (v[j] == 0.0) {
            add(a, false);
            continue;
        }
        if (v[j + 1] != 0.0 && (v[j] > 0) != (v[j + 1] > 0)) {
            add(safeguarded_newton(fn, df, a, b, 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, b),
                                   1e-14 * fmax),
                false);
            continue;
        }
        // Local dip of |f| with no sign change: tangency or an unresolved pair.
        const double prev = v[j == 0 ? n - 1 : j - 1];
        if (v[j + 1] == 0.0 || (prev > 0) != (v[j] > 0) || (v[j + 1] > 0) != (v[j] > 0)) continue;
        if (!(std::abs(v[j]) < std::abs(prev) && std::abs(v[j]) <= std::abs(v[j + 1]))) continue;
        const double s = v[j] > 0 ? 1.0 : -1.0;
        auto signed_f = [&](double y) { return s * f(y); };
        const double zmin = golden_minimize(signed_f, a - h, b, 1e-10 * h);
        const double fmin = signed_f(zmin);
        if (fmin < 0.0) {
            out.hidden_pair = true;
        } else if (fmin <= 1e-12 * fmax) {
            add(zmin, true);
        }
    }

    // Normalize into [0, P), snap near-P to 0, sort, merge duplicates.
    for (ZeroData& z : out.zeros) {
        z.z = std::fmod(z.z, P);
        if (z.z < 0) z.z += P;
        if (P - z.z <= 1e-12 * P) {
            z.z = 0.0;
            z.lambda = f.d1(0.0);
        }
    }
    std::sort(out.zeros.begin(), out.zeros.end(), [](const ZeroData& x, const ZeroData& y) { return x.z < y.z; });
    std::vector<ZeroData> merged;
    for (const ZeroData& z : out.zeros) {
        if (!merged.empty() && z.z - merged.back().z <= 1e-10 * P) continue;
        merged.push_back(z);
    }
    if (merged.size() > 1 && merged.front().z + P - merged.back().z <= 1e-10 * P) merged.pop_back();
    out.zeros = std::move(merged);
    return out;
}

}  // namespace

std::vector<ZeroData> find_zeros(const PeriodicFunction& f, const ZeroOptions& opt) {
    int n = opt.grid;
    ScanResult cur = scan(f, n, opt);
    for (int r = 0; r < opt.max_refinements; ++r) {
        n *= 2;
        ScanResult next = scan(f, n, opt);
        const bool stable = !cur.hidden_pair && !next.hidden_pair && next.zeros.size() == cur.zeros.size();
        cur = std::move(next);
        if (stable) {
            if (opt.require_hyperbolic) {
                for (const ZeroData& z : cur.zeros) {
                    if (!z.simple)
                        throw NonHyperbolic("zero at y=" + std::to_string(z.z) + " has |f'| = " +
                                            std::to_string(std::abs(z.lambda)) + " <= tau_simple");
                }
            }
            return cur.zeros;
        }
    }
    throw GridTooCoarse("zero count not stable after " + std::to_string(opt.max_refinements) +
                        " grid refinements (suspected tangential or clustered zeros)");
}

double fundamental_period(const PeriodicFunction& f) {
    const double P = f.period();
    const int n = PeriodicFunction::kCheckGrid;
    const double tol = 1e-9 * std::max(1.0, f.max_abs());
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) v[j] = f(P * j / n);
    for (int k = 64; k >= 2; --k) {
        const double q = P / k;
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) ok = std::abs(f(P * j / n + q) - v[j]) <= tol;
        if (ok) return q;
    }
    return P;
}

PeriodicFunction class_transform(const PeriodicFunction& f, double a, double b) {
    if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("class_transform needs finite a != 0");
    const Expr y = Expr::variable(f.profile().variable());
    const Expr inner = y / Expr::constant(a) + Expr::constant(b);
    const Expr g = Expr::constant(a * a) * substitute(f.expr(), inner);
    return PeriodicFunction::create(g, std::abs(a) * f.period());
}

PeriodicFunction reflect(const PeriodicFunction& f) {
    const Expr y = Expr::variable(f.profile().variable());
    return PeriodicFunction::create(-substitute(f.expr(), -y), f.period());
}

PeriodicFunction translate(const PeriodicFunction& f, double c) {
    const Expr y = Expr::variable(f.profile().variable());
    return PeriodicFunction::create(substitute(f.expr(), y + Expr::constant(c)), f.period());
}

std::optional<ClassRelation> same_class(const PeriodicFunction& f, const PeriodicFunction& g) {
    const double pf = fundamental_period(f);
    const double pg = fundamental_period(g);
    const double abs_a = pg / pf;
    const int n = PeriodicFunction::kCheckGrid;
    const double tol = 1e-8 * (1.0 + g.max_abs());
    auto check = [&](double a, double b) {
        for (int j = 0; j < n; ++j) {
            const double y = g.period() * j / n;
            if (std::abs(g(y) - a * a * f(y / a + b)) > tol) return false;
        }
        return true;
    };
    const auto zf = find_zeros(f);
    const auto zg = find_zeros(g);
    if (zf.empty() || zg.empty()) {
        if (zf.size() != zg.size()) return std::nullopt;
        for (double a : {abs_a, -abs_a})
            if (check(a, 0.0)) return ClassRelation{a, 0.0};
        return std::nullopt;
    }
    // Zero counts per fundamental period must agree.
    auto per_fund = [](const std::vector<ZeroData>& z, double p0) {
        return std::count_if(z.begin(), z.end(), [p0](const ZeroData& d) { return d.z < p0 * (1 - 1e-12); });
    };
    if (per_fund(zf, pf) != per_fund(zg, pg)) return std::nullopt;
    for (double a : {abs_a, -abs_a}) {
        for (const ZeroData& zk : zf) {
            if (zk.z >= pf * (1 - 1e-12)) break;
            if (std::abs(zg[0].lambda - a * zk.lambda) > 1e-6 * std::abs(zg[0].lambda)) continue;
            const double b = zk.z - zg[0].z / a;
            if (check(a, b)) return ClassRelation{a, b};
        }
    }
    return std::nullopt;
}

}  // namespace kconf
