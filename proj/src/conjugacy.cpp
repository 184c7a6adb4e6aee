#include "kconf/conjugacy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>

#include "kconf/errors.hpp"
#include "kconf/numerics.hpp"
#include "kconf/ode.hpp"

namespace kconf {

namespace {

constexpr int kCheb = 24;

struct Panel {
    double a = 0, b = 0;  // a nearer to the zero
    double mid = 0, half = 0;
    std::array<double, kCheb> c{};
    double end_value = 0;  // H(b)

    double eval(double y) const {
        const double x = (y - mid) / half;
        double b1 = 0, b2 = 0;
        for (int j = kCheb - 1; j >= 1; --j) {
            const double t = 2 * x * b1 - b2 + c[static_cast<std::size_t>(j)];
            b2 = b1;
            b1 = t;
        }
        return x * b1 - b2 + c[0];
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// ZeroChart

struct ZeroChartTable {
    std::vector<Panel> right, left;  // ordered outward from the zero
    double reach_right = 0, reach_left = 0;
    double h_bound = 0;  // max |H| over the table
};

namespace {

// Build panels of H along dir = +-1 from z + dir*r0 (where H = H0) out to z + dir*reach.
std::vector<Panel> tabulate(const std::function<double(double)>& h, double z, int dir, double r0, double H0,
                            double reach, double& hmax) {
    std::vector<Panel> out;
    double s = r0, H = H0;
    double width = (reach - r0) / 8;
    const double min_width = reach * 1e-7;
    while (s < reach * (1 - 1e-15)) {
        const double w = std::min(width, reach - s);
        Panel p;
        p.a = z + dir * s;
        p.b = z + dir * (s + w);
        p.mid = 0.5 * (p.a + p.b);
        p.half = 0.5 * (p.b - p.a);
        std::array<double, kCheb> vals{};
        // Nodes from a toward b: x_k = cos(pi (k + 1/2)/N) runs from ~1 (b) to ~-1 (a).
        double prev = p.a, acc = H;
        for (int k = kCheb - 1; k >= 0; --k) {
            const double x = std::cos(std::numbers::pi * (k + 0.5) / kCheb);
            const double y = p.mid + p.half * x;
            acc += integrate_gk15(h, prev, y, 1e-17, 1e-16, 16).value;
            vals[static_cast<std::size_t>(k)] = acc;
            prev = y;
        }
        const double Hb = acc + integrate_gk15(h, prev, p.b, 1e-17, 1e-16, 16).value;
        double scale = 1.0;
        for (int j = 0; j < kCheb; ++j) {
            double sum = 0;
            for (int k = 0; k < kCheb; ++k)
                sum += vals[static_cast<std::size_t>(k)] * std::cos(std::numbers::pi * j * (k + 0.5) / kCheb);
            p.c[static_cast<std::size_t>(j)] = 2.0 * sum / kCheb;
            scale = std::max(scale, std::abs(vals[static_cast<std::size_t>(j)]));
        }
        p.c[0] *= 0.5;
        const double tail = std::max({std::abs(p.c[kCheb - 1]), std::abs(p.c[kCheb - 2]), std::abs(p.c[kCheb - 3])});
        const double tol = 1e-14 * scale;
        if (tail <= tol || w <= min_width) {
            p.end_value = Hb;
            hmax = std::max(hmax, scale);
            out.push_back(p);
            s += w;
            H = Hb;
            if (tail < 1e-3 * tol) width = 2 * w;
        } else {
            width = 0.5 * w;
        }
    }
    return out;
}

}  // namespace

ZeroChart::ZeroChart(Profile f, double z, double lambda, double lo, double hi)
    : ZeroChart(std::move(f), z, lambda, lo, hi, true, true) {}

ZeroChart::ZeroChart(Profile f, double z, double lambda, double lo, double hi, bool lo_is_zero, bool hi_is_zero)
    : f_(std::move(f)), z_(z), lambda_(lambda), lo_(lo), hi_(hi) {
    if (!(lo < z && z < hi)) throw InvalidArgument("ZeroChart: zero must lie inside its interval");
    if (lambda == 0.0 || !std::isfinite(lambda)) throw NonSimpleZero("ZeroChart: f'(z) must be nonzero");
    const double f2 = f_.d2(z), f3 = f_.d3(z);
    const double l = lambda;
    c0_ = -f2 / (2 * l * l);
    c1_ = f2 * f2 / (4 * l * l * l) - f3 / (6 * l * l);
    // Inside this radius the Taylor form of h is more accurate than 1/f - 1/(lambda s).
    taylor_ = 1e-4 * std::min(z - lo, hi - z);

    auto tab = std::make_shared<ZeroChartTable>();
    tab->reach_right = hi_is_zero ? 0.55 * (hi - z) : (hi - z);
    tab->reach_left = lo_is_zero ? 0.55 * (z - lo) : (z - lo);
    auto hf = [this](double y) { return h(y); };
    double hmax = 0;
    const double r = taylor_;
    tab->right = tabulate(hf, z, +1, r, r * (c0_ + 0.5 * c1_ * r), tab->reach_right, hmax);
    tab->left = tabulate(hf, z, -1, r, -r * (c0_ - 0.5 * c1_ * r), tab->reach_left, hmax);
    tab->h_bound = hmax;
    table_ = std::move(tab);
}

double ZeroChart::h(double y) const {
    const double s = y - z_;
    if (std::abs(s) < taylor_) return c0_ + c1_ * s;
    return 1.0 / f_.f(y) - 1.0 / (lambda_ * s);
}

double ZeroChart::H(double y) const {
    const double s = y - z_;
    if (std::abs(s) <= taylor_) return s * (c0_ + 0.5 * c1_ * s);
    if (!table_) throw InvalidArgument("ZeroChart: not initialised");
    const auto& panels = s > 0 ? table_->right : table_->left;
    const double reach = s > 0 ? table_->reach_right : table_->reach_left;
    const double d = std::abs(s);
    if (d <= reach && !panels.empty()) {
        // Panels are contiguous from the Taylor radius outward.
        auto it = std::lower_bound(panels.begin(), panels.end(), d,
                                   [this](const Panel& p, double dist) { return std::abs(p.b - z_) < dist; });
        if (it == panels.end()) it = panels.end() - 1;
        return it->eval(y);
    }
    if (!(y > lo_ && y < hi_)) throw DomainError("ZeroChart: point outside the chart interval");
    const double start = panels.empty() ? z_ + (s > 0 ? taylor_ : -taylor_) : panels.back().b;
    const double H0 = panels.empty() ? H(start) : panels.back().end_value;
    const auto q = integrate_gk15([this](double t) { return h(t); }, start, y, 1e-13, 1e-13, 4000);
    if (!q.converged && q.error > 1e-9 * (1 + std::abs(q.value)))
        throw NumericalStall("ZeroChart: quadrature of the chart integrand did not converge");
    return H0 + q.value;
}

double ZeroChart::log_abs(double y) const {
    const double s = y - z_;
    return std::log(std::abs(s)) + lambda_ * H(y);
}

double ZeroChart::value(double y) const {
    const double s = y - z_;
    if (s == 0.0) return 0.0;
    return s * std::exp(lambda_ * H(y));
}

double ZeroChart::stretch(double y) const {
    const double s = y - z_;
    return 1.0 + lambda_ * s * h(y);
}

double ZeroChart::derivative(double y) const { return std::exp(lambda_ * H(y)) * stretch(y); }

double ZeroChart::solve_log(double L, int sigma, double u_max) const {
    auto point = [&](double u) { return z_ + sigma * std::exp(u); };
    auto G = [&](double u) { return u + lambda_ * H(point(u)) - L; };
    auto dG = [&](double u) { return stretch(point(u)); };
    const double bound = std::abs(lambda_) * (table_ ? table_->h_bound : 0.0) + 1.0;
    double hi = std::min(u_max, L + bound);
    double lo = std::min(L, hi) - bound;
    double ghi = G(hi);
    if (ghi < 0) {
        if (hi == u_max && ghi > -1e-9 * (1 + std::abs(L))) return u_max;
        // The bound was too tight; widen toward u_max.
        hi = u_max;
        ghi = G(hi);
        if (ghi < 0) {
            if (ghi > -1e-9 * (1 + std::abs(L))) return u_max;
            throw NumericalStall("ZeroChart: chart value beyond the half strip");
        }
    }
    double step = bound;
    while (G(lo) > 0) {
        lo -= step;
        step *= 2;
        if (step > 1e4) throw NumericalStall("ZeroChart: no lower bracket for the chart inverse");
    }
    return safeguarded_newton(G, dG, lo, hi, 1e-15 * (1 + std::abs(L)), 4e-16 * (1 + std::abs(L)));
}

// ---------------------------------------------------------------------------
// StripAtlas

StripAtlas::StripAtlas(const PeriodicFunction& f, double P) : f_(f), period_(P) {
    const double P0 = f.period();
    const long k = std::lround(P / P0);
    if (k < 1 || std::abs(P - k * P0) > 1e-9 * P) throw InvalidArgument("StripAtlas: period must be a multiple of the declared period");
    ZeroOptions zo;
    zo.require_hyperbolic = true;
    const auto base = find_zeros(f, zo);
    if (base.empty()) throw NoZeros("StripAtlas: f has no zeros");
    std::vector<double> lam;
    for (long c = 0; c < k; ++c)
        for (const ZeroData& z : base) {
            z_.push_back(z.z + c * P0);
            lam.push_back(z.lambda);
        }
    n_ = static_cast<int>(z_.size());
    for (int i = 0; i < n_; ++i) {
        const double lo = i > 0 ? z_[static_cast<std::size_t>(i - 1)] : z_.back() - P;
        const double hi = i + 1 < n_ ? z_[static_cast<std::size_t>(i + 1)] : z_.front() + P;
        charts_.emplace_back(f.profile(), z_[static_cast<std::size_t>(i)], lam[static_cast<std::size_t>(i)], lo, hi);
    }
    for (long i = 0; i < n_; ++i) {
        const double m = midpoint(i);
        alpha_.push_back(-chart_log_abs(i, m) / lambda(i));
        beta_.push_back(-chart_log_abs(i + 1, m) / lambda(i + 1));
    }
}

double StripAtlas::zero(long i) const { return z_[wrap(i)] + static_cast<double>(lift(i)) * period_; }

double StripAtlas::midpoint(long i) const { return 0.5 * (zero(i) + zero(i + 1)); }

double StripAtlas::chart_log_abs(long i, double y) const {
    return charts_[wrap(i)].log_abs(y - static_cast<double>(lift(i)) * period_);
}

double StripAtlas::chart_H(long i, double y) const {
    return charts_[wrap(i)].H(y - static_cast<double>(lift(i)) * period_);
}

double StripAtlas::chart_stretch(long i, double y) const {
    return charts_[wrap(i)].stretch(y - static_cast<double>(lift(i)) * period_);
}

StripAtlas::Local StripAtlas::local(long i, double y) const {
    const long c = y <= midpoint(i) ? i : i + 1;
    const ZeroChart& ch = charts_[wrap(c)];
    const double yb = y - static_cast<double>(lift(c)) * period_;
    const double s = yb - ch.zero();
    Local out;
    out.chart = c;
    out.log_s = std::log(std::abs(s));
    out.sigma = s >= 0 ? 1 : -1;
    out.stretch = ch.stretch(yb);
    out.log_abs_psi = out.log_s + ch.lambda() * ch.H(yb);
    return out;
}

double StripAtlas::strip_time(long i, double y) const {
    const Local l = local(i, y);
    return l.log_abs_psi / lambda(l.chart) + (l.chart == i ? alpha(i) : beta(i));
}

double StripAtlas::log_abs_psi(long i, double y) const {
    if (y >= zero(i)) {
        if (y <= midpoint(i)) return chart_log_abs(i, y);
        return lambda(i) * (strip_time(i, y) - alpha(i));
    }
    if (y >= midpoint(i - 1)) return chart_log_abs(i, y);
    return lambda(i) * (strip_time(i - 1, y) - beta(i - 1));
}

long StripAtlas::locate(double y, long& k) const {
    const double z0 = z_.front();
    k = static_cast<long>(std::floor((y - z0) / period_));
    double yr = y - static_cast<double>(k) * period_;
    if (yr >= z0 + period_) {
        ++k;
        yr -= period_;
    } else if (yr < z0) {
        --k;
        yr += period_;
    }
    auto it = std::upper_bound(z_.begin(), z_.end(), yr);
    return static_cast<long>(it - z_.begin()) - 1;
}

StripAtlas::Inverse StripAtlas::strip_time_inverse(long i, double T) const {
    const bool left = T * lambda(i) <= 0.0;
    const long c = left ? i : i + 1;
    const double C = left ? alpha(i) : beta(i);
    const int sigma = left ? 1 : -1;
    const double L = lambda(c) * (T - C);
    const double u_max = std::log(0.5 * (zero(i + 1) - zero(i)));
    const ZeroChart& ch = charts_[wrap(c)];
    const double u = ch.solve_log(L, sigma, u_max);
    Inverse out;
    out.chart = c;
    out.log_s = u;
    out.sigma = sigma;
    out.y = zero(c) + sigma * std::exp(u);
    out.stretch = ch.stretch(ch.zero() + sigma * std::exp(u));
    return out;
}

double StripAtlas::mu() const {
    double s = 0;
    for (int i = 0; i < n_; ++i) s += beta_[static_cast<std::size_t>(i)] - alpha_[static_cast<std::size_t>(i)];
    return s;
}

// ---------------------------------------------------------------------------
// flow, time_integral

double flow(const PeriodicFunction& f, double y0, double t) {
    if (!std::isfinite(y0) || !std::isfinite(t)) throw InvalidArgument("flow: non-finite input");
    if (t == 0.0 || f(y0) == 0.0) return y0;
    using Solver = Dopri5<1>;
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-12;
    const auto res = Solver::integrate([&f](double, const Solver::State& y, Solver::State& dy) { dy[0] = f(y[0]); },
                                       0.0, {y0}, t, opt);
    if (res.status != OdeStatus::Completed)
        throw NumericalStall(std::string("flow: integration stopped (") + to_string(res.status) + ")");
    return res.y[0];
}

double time_integral(const PeriodicFunction& f, double y_ref, double y) {
    if (!std::isfinite(y_ref) || !std::isfinite(y)) throw InvalidArgument("time_integral: non-finite input");
    if (y_ref == y) return 0.0;
    const double lo = std::min(y_ref, y), hi = std::max(y_ref, y);
    const double P = f.period();
    const double tiny = 1e-14 * f.max_abs();
    if (std::abs(f(y_ref)) <= tiny || std::abs(f(y)) <= tiny)
        throw DomainError("time_integral: an endpoint is a zero of f, the integral diverges");
    for (const ZeroData& z : find_zeros(f)) {
        const double first = z.z + std::ceil((lo - z.z) / P) * P;
        if (first < hi && first > lo)
            throw CrossesZero("time_integral: a zero of f lies between the endpoints");
    }
    const auto q = integrate_gk15([&f](double s) { return 1.0 / f(s); }, y_ref, y, 1e-13, 1e-12, 8000);
    if (!q.converged && q.error > 1e-9 * (1 + std::abs(q.value)))
        throw NumericalStall("time_integral: quadrature did not converge");
    return q.value;
}

// ---------------------------------------------------------------------------
// DiffeoMap

DiffeoMap::DiffeoMap(Fn eval, Fn deriv, double lo, double hi, int orientation, double period, double image_period)
    : eval_(std::move(eval)),
      deriv_(std::move(deriv)),
      lo_(lo),
      hi_(hi),
      orientation_(orientation),
      period_(period),
      image_period_(image_period) {}

void DiffeoMap::write_csv(std::ostream& os, int samples) const {
    if (samples < 1) throw InvalidArgument("write_csv: need at least one sample");
    os << "y,phi,dphi\n";
    char buf[96];
    for (int k = 0; k < samples; ++k) {
        const double y = is_circle() ? lo_ + period_ * k / samples : lo_ + (hi_ - lo_) * (k + 0.5) / samples;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", y, eval_(y), deriv_(y));
        os << buf;
    }
}

// ---------------------------------------------------------------------------
// linearize_at

namespace {

// phi = sign * exp(lambda * tau) on the strip from z to `other`, tau measured from
// the strip midpoint. Near half: phi = psi_z / |psi_z(m)|. Far half uses the chart of
// `other` when it is a zero, otherwise psi_z throughout.
DiffeoMap linearization(const Profile& f, std::shared_ptr<const ZeroChart> near,
                        std::shared_ptr<const ZeroChart> far, double other) {
    const double z = near->zero();
    const double lam = near->lambda();
    const double m = 0.5 * (z + other);
    const int dir = other > z ? 1 : -1;
    const double log_norm = near->log_abs(m);  // ln|psi_z(m)|
    // tau on the far half: ln|psi_other| / lambda_other + beta, with tau(m) = 0.
    const double beta = far ? -far->log_abs(m) / far->lambda() : 0.0;
    auto in_near = [=](double y) { return std::abs(y - z) <= std::abs(m - z); };
    auto check = [=](double y) {
        if (!((y - z) * dir >= 0 && (other - y) * dir > 0)) throw DomainError("linearization: point outside the strip");
    };
    auto eval = [=](double y) {
        check(y);
        if (y == z) return 0.0;
        if (!far || in_near(y)) return near->value(y) * std::exp(-log_norm);
        const double tau = far->log_abs(y) / far->lambda() + beta;
        return dir * std::exp(lam * tau);
    };
    auto deriv = [=](double y) {
        check(y);
        if (!far || in_near(y)) return near->derivative(y) * std::exp(-log_norm);
        const double tau = far->log_abs(y) / far->lambda() + beta;
        return lam * dir * std::exp(lam * tau) / f.f(y);
    };
    const double lo = std::min(z, other), hi = std::max(z, other);
    DiffeoMap phi(eval, deriv, lo, hi, 1);
    // sup |phi' f - lambda phi| / |lambda phi| on 10^4 points, 1e-3 (relative) off both ends.
    const int n = 10000;
    const double a = lo + 1e-3 * (hi - lo), b = hi - 1e-3 * (hi - lo);
    double worst = 0;
    for (int k = 0; k <= n; ++k) {
        const double y = a + (b - a) * k / n;
        const double lp = lam * phi(y);
        worst = std::max(worst, std::abs(phi.derivative(y) * f.f(y) - lp) / std::abs(lp));
    }
    phi.residual = worst;
    return phi;
}

}  // namespace

DiffeoMap linearize_at(const PeriodicFunction& f, const ZeroData& zd, Side side) {
    const StripAtlas atlas(f, f.period());
    const double P = f.period();
    long idx = -1;
    double best = 1e-9 * P;
    for (long i = 0; i < atlas.size(); ++i) {
        double d = std::abs(atlas.zero(i) - zd.z);
        d = std::min(d, P - d);
        if (d <= best) {
            best = d;
            idx = i;
        }
    }
    if (idx < 0) throw NotAZero("linearize_at: the given point is not a zero of f");
    const long j = side == Side::Right ? idx + 1 : idx - 1;
    const double z = atlas.zero(idx), other = atlas.zero(j);
    auto mk = [&](long i) {
        return std::make_shared<const ZeroChart>(f.profile(), atlas.zero(i), atlas.lambda(i), atlas.zero(i - 1),
                                                 atlas.zero(i + 1));
    };
    (void)z;
    return linearization(f.profile(), mk(idx), mk(j), other);
}

DiffeoMap linearize_at(const Profile& f, double z, double other, Side side) {
    if (!std::isfinite(z) || !std::isfinite(other) || other == z) throw InvalidArgument("linearize_at: bad strip");
    if ((side == Side::Right) != (other > z)) throw InvalidArgument("linearize_at: strip end is on the wrong side");
    const double lam = f.d1(z);
    const double scale = std::max({std::abs(f.f(other)), std::abs(lam) * std::abs(other - z), 1e-300});
    if (std::abs(f.f(z)) > 1e-12 * scale) throw NotAZero("linearize_at: f does not vanish at the given point");
    if (lam == 0.0) throw NonSimpleZero("linearize_at: f'(z) = 0");
    const bool other_zero = std::abs(f.f(other)) <= 1e-12 * scale;
    // f must keep one sign strictly inside the strip.
    const int grid = 2000;
    const double sgn = lam * (other - z) > 0 ? 1.0 : -1.0;
    for (int k = 1; k < grid; ++k) {
        const double y = z + (other - z) * k / grid;
        if (f.f(y) * sgn <= 0.0) throw CrossesZero("linearize_at: f vanishes inside the strip");
    }
    const double lo = std::min(z, other), hi = std::max(z, other);
    const double w = hi - lo;
    std::shared_ptr<const ZeroChart> near, far;
    if (side == Side::Right)
        near = std::make_shared<const ZeroChart>(f, z, lam, z - w, hi, false, other_zero);
    else
        near = std::make_shared<const ZeroChart>(f, z, lam, lo, z + w, other_zero, false);
    if (other_zero) {
        const double l2 = f.d1(other);
        if (l2 == 0.0) throw NonSimpleZero("linearize_at: the far zero is not simple");
        if (side == Side::Right)
            far = std::make_shared<const ZeroChart>(f, other, l2, lo, other + w, true, false);
        else
            far = std::make_shared<const ZeroChart>(f, other, l2, other - w, hi, false, true);
    }
    return linearization(f, near, far, other);
}

// ---------------------------------------------------------------------------
// build_conjugacy

namespace {

struct Conj {
    StripAtlas ax, ay;
    double a;  // effective scale between the raw profiles
    int orient;
    int shift;
    std::vector<double> c;

    long image_zero(long i) const { return orient > 0 ? i - shift : -i - shift; }
    long image_strip(long i) const { return orient > 0 ? i - shift : -i - shift - 1; }

    double eval(double y) const {
        long k;
        const long i = ax.locate(y, k);
        const double yr = y - static_cast<double>(k) * ax.period();
        const double lift = static_cast<double>(k) * orient * ay.period();
        if (yr == ax.zero(i)) return ay.zero(image_zero(i)) + lift;
        const auto l = ax.local(i, yr);
        const double C = l.chart == i ? ax.alpha(i) : ax.beta(i);
        const double T = (l.log_abs_psi / ax.lambda(l.chart) + C) / a + c[static_cast<std::size_t>(i)];
        return ay.strip_time_inverse(image_strip(i), T).y + lift;
    }

    double deriv(double y) const {
        long k;
        const long i = ax.locate(y, k);
        const double yr = y - static_cast<double>(k) * ax.period();
        if (yr == ax.zero(i)) {
            const long js = image_strip(i);
            const double Cy = orient > 0 ? ay.alpha(js) : ay.beta(js);
            const double ly = ay.lambda(image_zero(i));
            const double K = ly * (ax.alpha(i) / a + c[static_cast<std::size_t>(i)] - Cy);
            return orient * (ly / (a * ax.lambda(i))) * std::exp(K);
        }
        const auto l = ax.local(i, yr);
        const double C = l.chart == i ? ax.alpha(i) : ax.beta(i);
        const double T = (l.log_abs_psi / ax.lambda(l.chart) + C) / a + c[static_cast<std::size_t>(i)];
        const auto inv = ay.strip_time_inverse(image_strip(i), T);
        const double rho = ay.lambda(inv.chart) / (a * ax.lambda(l.chart));
        return rho * (inv.sigma * l.sigma) * std::exp(inv.log_s - l.log_s) * l.stretch / inv.stretch;
    }
};

}  // namespace

double conjugacy_residual(const CircleField& X, const CircleField& Y, double a_eff, const DiffeoMap& phi,
                          int samples) {
    const auto& f = X.function();
    const auto& g = Y.function();
    const double P = X.period();
    const auto zs = X.zeros();
    const double h = 1e-5 * P / (2 * std::numbers::pi);
    double worst = 0;
    for (int j = 0; j < samples; ++j) {
        const double y = P * j / samples;
        bool skip = false;
        for (const ZeroData& z : zs) {
            double d = std::abs(y - z.z);
            d = std::min(d, P - d);
            if (d < 1e-3) skip = true;
        }
        if (skip) continue;
        const double d = (-phi(y + 2 * h) + 8 * phi(y + h) - 8 * phi(y - h) + phi(y - 2 * h)) / (12 * h);
        worst = std::max(worst, std::abs(a_eff * d * f(y) - g(phi(y))));
    }
    return worst / g.max_abs();
}

DiffeoMap build_conjugacy(const CircleField& X, const CircleField& Y, const MatchCertificate& cert) {
    auto cj = std::make_shared<Conj>(Conj{StripAtlas(X), StripAtlas(Y), cert.a * X.scale() / Y.scale(),
                                          cert.reversed ? -1 : 1, cert.shift, {}});
    const StripAtlas& ax = cj->ax;
    const StripAtlas& ay = cj->ay;
    const long n = ax.size();
    if (ay.size() != n) throw InvalidCertificate("build_conjugacy: the fields have different numbers of zeros");
    if (!(std::isfinite(cj->a) && cj->a != 0.0)) throw InvalidCertificate("build_conjugacy: bad scale");
    for (long i = 0; i < n; ++i) {
        const double want = cj->a * ax.lambda(i);
        const double got = ay.lambda(cj->image_zero(i));
        if (std::abs(got - want) > 1e-6 * std::abs(got))
            throw InvalidCertificate("build_conjugacy: multipliers do not correspond under the certificate");
    }
    // Strip constants: matching the chart relations on both sides of each zero
    // makes phi smooth there.
    std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
    for (long i = 0; i < n; ++i) {
        const long j0 = cj->image_strip(i), j1 = cj->image_strip(i + 1);
        const double cr = cj->orient > 0 ? ay.beta(j0) : ay.alpha(j0);
        const double cl = cj->orient > 0 ? ay.alpha(j1) : ay.beta(j1);
        c[static_cast<std::size_t>(i + 1)] =
            c[static_cast<std::size_t>(i)] + (ax.beta(i) - ax.alpha(i + 1)) / cj->a - (cr - cl);
    }
    const double defect = c[static_cast<std::size_t>(n)];
    const double mu_scale = 1.0 + std::abs(ay.mu()) + std::abs(ax.mu() / cj->a);
    if (!(std::abs(defect) <= 1e-6 * mu_scale))
        throw InvalidCertificate("build_conjugacy: the cycle does not close (mu mismatch " + std::to_string(defect) + ")");
    for (long i = 0; i <= n; ++i) c[static_cast<std::size_t>(i)] -= defect * static_cast<double>(i) / static_cast<double>(n);
    c.pop_back();
    cj->c = std::move(c);

    const double P = X.period(), Q = Y.period();
    DiffeoMap phi([cj](double y) { return cj->eval(y); }, [cj](double y) { return cj->deriv(y); }, ax.zero(0),
                  ax.zero(0) + P, cj->orient, P, Q);
    phi.closure_defect = defect;

    // Monotonicity and the conjugacy equation on the validation grid.
    const int grid = 10000;
    for (int j = 0; j < grid; ++j) {
        const double d = phi.derivative(ax.zero(0) + P * j / grid);
        if (!(std::isfinite(d) && d * cj->orient > 0))
            throw InvalidCertificate("build_conjugacy: derivative changes sign");
    }
    phi.residual = conjugacy_residual(X, Y, cj->a, phi, grid);
    if (!(phi.residual <= 1e-6))
        throw InvalidCertificate("build_conjugacy: residual " + std::to_string(phi.residual) + " exceeds 1e-6");
    return phi;
}

}  // namespace kconf
