#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "corpus.hpp"
#include "doctest.h"
#include "kconf/conjugacy.hpp"
#include "kconf/errors.hpp"

using namespace kconf;
constexpr double pi = std::numbers::pi;

namespace {

PeriodicFunction fn(const char* e, const char* p = "2*pi") { return PeriodicFunction::parse(e, p); }

// Distance of x to the lattice QZ.
double mod_dist(double x, double Q) {
    const double r = x - Q * std::round(x / Q);
    return std::abs(r);
}

// Fourth-order central difference with a step scaled to the distance d from the nearest singular point.
template <class F>
double fd(const F& phi, double y, double d) {
    const double h = 1e-3 * d;
    return (-phi(y + 2 * h) + 8 * phi(y + h) - 8 * phi(y - h) + phi(y - 2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("flow matches closed-form trajectories") {
    const auto s = fn("sin(y)");
    // y' = sin y from pi/2: tan(y/2) = e^t.
    for (double t : {-3.0, -0.5, 0.7, 2.0, 10.0})
        CHECK(std::abs(flow(s, pi / 2, t) - 2 * std::atan(std::exp(t))) <= 1e-10);
    CHECK(flow(s, 0.0, 5.0) == 0.0);
    CHECK(std::abs(flow(s, pi, 10.0) - pi) <= 1e-12);
    // Group law.
    const auto f = fn("sin(y)*(1+0.3*sin(y)) + 0.1*cos(2*y)");
    const double y0 = 1.1;
    CHECK(std::abs(flow(f, flow(f, y0, 0.8), 1.3) - flow(f, y0, 2.1)) <= 1e-10);
    CHECK(std::abs(flow(f, flow(f, y0, 1.7), -1.7) - y0) <= 1e-10);
}

TEST_CASE("time_integral") {
    const auto s = fn("sin(y)");
    for (double y : {0.1, 1.0, 2.5, 3.1})
        CHECK(std::abs(time_integral(s, pi / 2, y) - std::log(std::tan(y / 2))) <= 1e-10);
    CHECK(time_integral(s, 1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(time_integral(s, 1.0, 4.0), CrossesZero);
    CHECK_THROWS_AS(time_integral(s, pi / 2, 0.0), DomainError);
    CHECK_THROWS_AS(time_integral(s, -1.0, 1.0), CrossesZero);
    // Flow and time are inverse to each other.
    const auto f = fn("sin(y)*(1+0.3*sin(y)) + 0.1*cos(2*y)");
    const double y1 = flow(f, 1.0, 1.5);
    CHECK(std::abs(time_integral(f, 1.0, y1) - 1.5) <= 1e-9);
}

TEST_CASE("ZeroChart: sin at 0 is 2 tan(y/2)") {
    const Profile p = Profile::parse("sin(y)");
    const ZeroChart c(p, 0.0, 1.0, -pi, pi);
    for (double y : {-2.0, -0.5, -1e-6, 1e-9, 0.3, 1.0, 1.7}) {
        CHECK(std::abs(c.value(y) - 2 * std::tan(y / 2)) <= 1e-13 * (1 + std::abs(c.value(y))));
        const double sec = 1 / std::cos(y / 2);
        CHECK(std::abs(c.derivative(y) - sec * sec) <= 1e-12 * sec * sec);
    }
    CHECK(c.derivative(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    // Chart inverse.
    for (double y : {0.2, 1.4, 1e-12}) {
        const double u = c.solve_log(c.log_abs(y), 1, std::log(pi / 2));
        CHECK(std::abs(std::exp(u) - y) <= 1e-13 * y);
    }
    CHECK_THROWS_AS(ZeroChart(p, 0.0, 0.0, -1, 1), NonSimpleZero);
}

TEST_CASE("StripAtlas: mu by strip constants equals the pole-subtraction mu") {
    for (double b : {-0.5, 0.0, 0.2, 0.7}) {
        const StripAtlas A(cp_function(b), 2 * pi);
        CHECK(A.size() == 2);
        CHECK(std::abs(A.mu() + 2 * pi * b / std::sqrt(1 - b * b)) <= 1e-9);
    }
    for (const auto& tp : testcorpus::trig_polynomials(8, 31)) {
        INFO(tp.expr);
        const StripAtlas A(tp.f, 2 * pi);
        const double m = mu(CircleField(tp.f));
        CHECK(std::abs(A.mu() - m) <= 1e-8 * (1 + std::abs(m)));
    }
}

TEST_CASE("StripAtlas: strip time, its inverse, and the lift") {
    const auto f = fn("sin(y)*(1+0.3*sin(y)) + 0.1*cos(2*y) + 0.1*sin(2*y)");
    const StripAtlas A(f, 4 * pi);
    CHECK(A.size() == 4);
    CHECK(std::abs(A.zero(4) - A.zero(0) - 4 * pi) <= 1e-14);
    CHECK(std::abs(A.zero(-1) - (A.zero(3) - 4 * pi)) <= 1e-14);
    for (long i = -2; i < 6; ++i) {
        const double z0 = A.zero(i), z1 = A.zero(i + 1), m = A.midpoint(i);
        CHECK(A.strip_time(i, m) == doctest::Approx(0.0).epsilon(1e-12));
        for (double frac : {1e-7, 0.1, 0.4, 0.6, 0.93, 1 - 1e-6}) {
            const double y = z0 + frac * (z1 - z0);
            const double t = A.strip_time(i, y);
            // Independent: the plain quadrature of 1/f from the midpoint.
            if (frac > 1e-3 && frac < 1 - 1e-3) CHECK(std::abs(t - time_integral(f, m, y)) <= 1e-9 * (1 + std::abs(t)));
            const auto inv = A.strip_time_inverse(i, t);
            CHECK(std::abs(inv.y - y) <= 1e-12 * (1 + std::abs(y)));
        }
    }
    long k;
    CHECK(A.locate(A.zero(0) + 0.1, k) == 0);
    CHECK(k == 0);
    CHECK(A.locate(A.zero(2) - 8 * pi + 0.01, k) == 2);
    CHECK(k == -2);
}

TEST_CASE("linearize_at: sin at 0 gives tan(y/2)") {
    const auto s = fn("sin(y)");
    for (Side side : {Side::Right, Side::Left}) {
        const DiffeoMap phi = linearize_at(s, ZeroData{0.0, 1.0, true}, side);
        const double lo = side == Side::Right ? 1e-3 : -pi + 1e-3;
        const double hi = side == Side::Right ? pi - 1e-3 : -1e-3;
        for (int k = 0; k <= 400; ++k) {
            const double y = lo + (hi - lo) * k / 400;
            const double v = phi(y);
            CHECK(std::abs(v - std::tan(y / 2)) <= 1e-10 * std::abs(v));
            CHECK(std::abs(phi.derivative(y) * std::sin(y) - v) <= 1e-9 * std::abs(v));
            const double d = std::min(std::abs(y), pi - std::abs(y));
            CHECK(std::abs(fd(phi, y, d) * std::sin(y) - v) <= 1e-9 * std::abs(v));
        }
        CHECK(phi(0.0) == 0.0);
        CHECK(phi.residual <= 1e-9);
    }
    // At pi the multiplier is -1: phi = -1/tan(y/2) on (0, pi) up to the midpoint normalisation.
    const DiffeoMap q = linearize_at(s, ZeroData{pi, -1.0, true}, Side::Left);
    for (double y : {0.2, 1.5, 3.0}) CHECK(std::abs(q(y) + 1 / std::tan(y / 2)) <= 1e-10 * std::abs(q(y)));
    CHECK_THROWS_AS(linearize_at(s, ZeroData{1.0, 0.5, true}, Side::Right), NotAZero);
}

TEST_CASE("linearize_at: non-periodic profiles") {
    const DiffeoMap phi = linearize_at(Profile::parse("2*y"), 0.0, 1.0, Side::Right);
    for (double y : {0.0, 0.1, 0.5, 0.99}) CHECK(phi(y) == doctest::Approx(2 * y).epsilon(1e-14));
    CHECK_THROWS_AS(phi(-0.1), DomainError);
    // sin on (0, pi) with the far zero detected.
    const DiffeoMap t = linearize_at(Profile::parse("sin(y)"), 0.0, pi, Side::Right);
    for (double y : {0.01, 1.0, 3.0}) CHECK(std::abs(t(y) - std::tan(y / 2)) <= 1e-10 * t(y));
    CHECK_THROWS_AS(linearize_at(Profile::parse("sin(y)"), 0.0, 4.0, Side::Right), CrossesZero);
    CHECK_THROWS_AS(linearize_at(Profile::parse("sin(y)"), 0.5, 1.0, Side::Right), NotAZero);
}

TEST_CASE("build_conjugacy: class transforms give the affine map") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ub(-2.0, 2.0);
    const double as[] = {2.0, -3.0, 0.5, -0.7, 1.3};
    int idx = 0;
    for (const auto& tp : testcorpus::trig_polynomials(5, 77)) {
        const double a = as[idx++], b = ub(rng);
        INFO(tp.expr << " a=" << a << " b=" << b);
        const auto g = class_transform(tp.f, a, b);
        const CircleField X(tp.f), Y(g);
        const auto cert = equivalent(X, Y, true, a < 0);
        REQUIRE(cert.has_value());
        CHECK(cert->a == doctest::Approx(a).epsilon(1e-7));
        const DiffeoMap phi = build_conjugacy(X, Y, *cert);
        CHECK(phi.residual <= 1e-6);
        CHECK(phi.orientation() == (a > 0 ? 1 : -1));
        for (int k = 0; k < 300; ++k) {
            const double y = -7.0 + 0.05 * k;
            CHECK(mod_dist(phi(y) - a * (y - b), Y.period()) <= 1e-8);
            CHECK(std::abs(phi.derivative(y) - a) <= 1e-7 * std::abs(a));
        }
        // Lift.
        CHECK(std::abs(phi(1.0 + X.period()) - phi(1.0) - phi.orientation() * Y.period()) <= 1e-9);
        // Zeros go to zeros.
        for (const ZeroData& z : X.zeros()) CHECK(std::abs(g(phi(z.z))) <= 1e-10 * g.max_abs());
    }
}

TEST_CASE("build_conjugacy: a non-affine conjugacy is a flow map away from the true one") {
    // g = k_* f with k^{-1}(y) = y + 0.3 sin y, i.e. g(y) = f(y + 0.3 sin y) / (1 + 0.3 cos y).
    const auto tp = testcorpus::trig_polynomials(1, 4242).front();
    INFO(tp.expr);
    const Expr w = parse_expr("y + 0.3*sin(y)");
    const Expr ge = substitute(tp.f.expr(), w) / parse_expr("1 + 0.3*cos(y)");
    const auto g = PeriodicFunction::create(ge, 2 * pi);
    const CircleField X(tp.f), Y(g);
    const auto cert = equivalent(X, Y, false, false);
    REQUIRE(cert.has_value());
    CHECK(cert->a == doctest::Approx(1.0).epsilon(1e-8));
    const DiffeoMap phi = build_conjugacy(X, Y, *cert);
    CHECK(phi.residual <= 1e-6);
    CHECK(std::abs(phi.closure_defect) <= 1e-8);
    // kinv o phi is a self-conjugacy of X_f, hence the time-t flow for a single t.
    auto kinv = [](double y) { return y + 0.3 * std::sin(y); };
    const auto zs = X.zeros();
    const double y0 = 0.5 * (zs[0].z + zs[1].z);
    const double target = kinv(phi(y0));
    const double t = time_integral(tp.f, y0, target);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double z0 = zs[i].z, z1 = i + 1 < zs.size() ? zs[i + 1].z : zs[0].z + 2 * pi;
        for (double frac : {0.25, 0.5, 0.8}) {
            const double y = z0 + frac * (z1 - z0);
            CHECK(mod_dist(kinv(phi(y)) - flow(tp.f, y, t), 2 * pi) <= 1e-8);
        }
    }
}

TEST_CASE("build_conjugacy: naturality on composable certificates") {
    const auto f = fn("sin(y)*(1+0.3*sin(y)) + 0.1*cos(2*y) + 0.1*sin(2*y)");
    const auto g = class_transform(f, 1.5, 0.3);
    const auto h = class_transform(g, -0.8, -0.4);
    const CircleField X(f), Y(g), Z(h);
    const auto cxy = equivalent(X, Y, true, true);
    const auto cyz = equivalent(Y, Z, true, true);
    const auto cxz = equivalent(X, Z, true, true);
    REQUIRE(cxy);
    REQUIRE(cyz);
    REQUIRE(cxz);
    const DiffeoMap pxy = build_conjugacy(X, Y, *cxy), pyz = build_conjugacy(Y, Z, *cyz),
                    pxz = build_conjugacy(X, Z, *cxz);
    for (double y : {0.1, 0.9, 2.2, 4.0, 6.0}) CHECK(mod_dist(pxz(y) - pyz(pxy(y)), Z.period()) <= 1e-6);
}

TEST_CASE("build_conjugacy: scaled fields and bad certificates") {
    const auto f = fn("sin(y)*(1+0.2*sin(y))");
    const CircleField X(f, 2 * pi, 3.0), Y(class_transform(f, 2.0, 0.0), 4 * pi, 1.5);
    const auto cert = equivalent(X, Y, true, false);
    REQUIRE(cert);
    // a_eff = a * 3 / 1.5 must be the class scale 2.
    const DiffeoMap phi = build_conjugacy(X, Y, *cert);
    for (double y : {0.3, 2.0, 5.5}) CHECK(mod_dist(phi(y) - 2 * y, 4 * pi) <= 1e-8);

    MatchCertificate bad = *cert;
    bad.shift += 1;
    CHECK_THROWS_AS(build_conjugacy(X, Y, bad), InvalidCertificate);
    bad = *cert;
    bad.a *= 1.01;
    CHECK_THROWS_AS(build_conjugacy(X, Y, bad), InvalidCertificate);
    // Same multipliers, different mu: the cycle cannot close.
    const CircleField W(cp_function(0.3));
    CHECK_THROWS_AS(build_conjugacy(CircleField(f), W, MatchCertificate{}), InvalidCertificate);
}

TEST_CASE("DiffeoMap CSV dump") {
    const DiffeoMap phi = linearize_at(Profile::parse("2*y"), 0.0, 1.0, Side::Right);
    std::ostringstream os;
    phi.write_csv(os, 4);
    const std::string out = os.str();
    CHECK(out.rfind("y,phi,dphi\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 5);
}
