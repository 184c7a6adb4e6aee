#include "kconf/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include <boost/math/tools/toms748_solve.hpp>

#include "kconf/errors.hpp"

namespace kconf {

namespace {

// Kronrod nodes/weights (QUADPACK qk15); Gauss 7-point weights on odd nodes.
constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment qk15(const ScalarFn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = fc * wg[3];
    double resk = fc * wgk[7];
    double resabs = std::abs(resk);
    std::array<double, 7> fv1{}, fv2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += wgk[j] * (f1 + f2);
        resabs += wgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
    }
    const double reskh = resk * 0.5;
    double resasc = wgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += wgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double result = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(eps * 50 * resabs, err);
    return {a, b, result, err};
}

}  // namespace

QuadResult integrate_gk15(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol, int max_intervals) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Segment> heap;
    Segment first = qk15(f, a, b);
    out.evaluations = 15;
    double total = first.value;
    double error = first.error;
    heap.push(first);
    int intervals = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(total)) && intervals < max_intervals) {
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) {
            heap.push(worst);
            break;  // cannot split further
        }
        const Segment left = qk15(f, worst.a, mid);
        const Segment right = qk15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = error;
    out.converged = error <= std::max(abs_tol, rel_tol * std::abs(total));
    return out;
}

double safeguarded_newton(const ScalarFn& f, const ScalarFn& df, double lo, double hi, double x_tol, double f_tol,
                          int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) throw NoBracket("safeguarded_newton: no sign change on bracket");
    // Orient so that f(xl) < 0.
    double xl = lo, xh = hi;
    if (flo > 0) std::swap(xl, xh);
    double x = 0.5 * (lo + hi);
    double dxold = std::abs(hi - lo);
    double dx = dxold;
    double fx = f(x);
    double dfx = df(x);
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fx) <= f_tol) return x;
        const bool newton_leaves = ((x - xh) * dfx - fx) * ((x - xl) * dfx - fx) > 0.0;
        if (newton_leaves || std::abs(2.0 * fx) > std::abs(dxold * dfx)) {
            dxold = dx;
            dx = 0.5 * (xh - xl);
            x = xl + dx;
        } else {
            dxold = dx;
            dx = fx / dfx;
            const double prev = x;
            x -= dx;
            if (x == prev) return x;
        }
        fx = f(x);
        dfx = df(x);
        if (fx < 0.0)
            xl = x;
        else
            xh = x;
        if (std::abs(xh - xl) <= x_tol) {
            // Return the better endpoint-or-iterate.
            return x;
        }
    }
    return x;
}

double bracketed_root(const ScalarFn& f, double lo, double hi, double x_tol) {
    const double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) throw NoBracket("bracketed_root: no sign change on bracket");
    boost::uintmax_t max_iter = 500;
    auto tol = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol; };
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
    return 0.5 * (r.first + r.second);
}

double neville_at_zero(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> p = ys;
    const std::size_t n = xs.size();
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i) {
            const double xi = xs[i], xj = xs[i + m];
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    return p.empty() ? 0.0 : p[0];
}

double golden_minimize(const ScalarFn& f, double lo, double hi, double x_tol) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > x_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace kconf
