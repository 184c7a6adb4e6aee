#include <cmath>
#include <numbers>
#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "kconf/errors.hpp"
#include "kconf/funcspace.hpp"

using namespace kconf;
constexpr double pi = std::numbers::pi;

TEST_CASE("periodicity is checked at construction") {
    CHECK_NOTHROW(PeriodicFunction::parse("sin(y)", "2*pi"));
    CHECK_THROWS_AS(PeriodicFunction::parse("sin(y)", "3"), NotPeriodic);
    CHECK_THROWS_AS(PeriodicFunction::parse("y", "1"), NotPeriodic);
    CHECK_THROWS_AS(PeriodicFunction::parse("1/sin(y)", "2*pi"), DomainError);
    CHECK_THROWS_AS(PeriodicFunction::parse("sin(y)", "-1"), InvalidArgument);
    CHECK_THROWS_AS(PeriodicFunction::parse("sin(y)", "y"), InvalidArgument);
    const auto f = PeriodicFunction::parse("4*sin(t)", "2*pi");
    CHECK(f.max_abs() == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("find_zeros: examples") {
    auto zs = find_zeros(PeriodicFunction::parse("sin(y)", "2*pi"));
    REQUIRE(zs.size() == 2);
    CHECK(zs[0].z == 0.0);
    CHECK(zs[0].lambda == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(zs[1].z - pi) < 1e-15);
    CHECK(zs[1].lambda == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(zs[0].simple);
    CHECK(zs[1].simple);

    // f_b' = cos(y)(1 + 2b sin y): +-1 at 0 and pi.
    zs = find_zeros(PeriodicFunction::parse("sin(y)*(1+0.2*sin(y))", "2*pi"));
    REQUIRE(zs.size() == 2);
    CHECK(std::abs(zs[0].z) < 1e-15);
    CHECK(std::abs(zs[0].lambda - 1.0) < 1e-14);
    CHECK(std::abs(zs[1].z - pi) < 1e-14);
    CHECK(std::abs(zs[1].lambda + 1.0) < 1e-14);

    CHECK(find_zeros(PeriodicFunction::parse("1", "1")).empty());
    CHECK(find_zeros(PeriodicFunction::parse("2 + cos(y)", "2*pi")).empty());

    // Zero slightly below P is normalized to 0.
    zs = find_zeros(PeriodicFunction::parse("sin(y + 1e-15)", "2*pi"));
    REQUIRE(zs.size() == 2);
    CHECK(zs[0].z == 0.0);
}

TEST_CASE("find_zeros: tangential zeros") {
    const auto sq = PeriodicFunction::parse("sin(y)^2", "2*pi");
    auto zs = find_zeros(sq);
    REQUIRE(zs.size() == 2);
    CHECK(!zs[0].simple);
    CHECK(!zs[1].simple);
    CHECK(std::abs(zs[1].z - pi) < 1e-6);
    ZeroOptions opt;
    opt.require_hyperbolic = true;
    CHECK_THROWS_AS(find_zeros(sq, opt), NonHyperbolic);

    // A pair of zeros 2e-6 apart centred inside a cell of the finest grid.
    const double c = 1000.5 * 2 * pi / (4096 * 128);
    const auto pair = PeriodicFunction::parse("sin(y - " + testcorpus::fmt(c) + ")^2 - 1e-12", "2*pi");
    CHECK_THROWS_AS(find_zeros(pair), GridTooCoarse);

    // Same pair but wide enough to be resolved after refinement.
    const auto wide = PeriodicFunction::parse("sin(y - " + testcorpus::fmt(c) + ")^2 - 1e-8", "2*pi");
    zs = find_zeros(wide);
    CHECK(zs.size() == 4);
}

TEST_CASE("find_zeros: certification properties on the random corpus") {
    for (const auto& tp : testcorpus::trig_polynomials(25, 99)) {
        const auto& f = tp.f;
        const auto zs = find_zeros(f);
        const double P = f.period();
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const ZeroData& z = zs[i];
            CHECK(z.z >= 0.0);
            CHECK(z.z < P);
            CHECK(std::abs(f(z.z)) <= 1e-12 * f.max_abs());
            const double d = P * 1e-4;
            CHECK(f(z.z - d) * f(z.z + d) < 0.0);
            CHECK(z.lambda == f.d1(z.z));
            // Alternating signs.
            CHECK((z.lambda > 0) != (zs[(i + 1) % zs.size()].lambda > 0));
            if (i) CHECK(zs[i - 1].z < z.z);
        }
        CHECK(zs.size() % 2 == 0);
    }
}

TEST_CASE("fundamental_period") {
    CHECK(fundamental_period(PeriodicFunction::parse("sin(y)", "4*pi")) == doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(fundamental_period(PeriodicFunction::parse("sin(y)*(1+0.2*sin(y))", "2*pi")) ==
          doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(fundamental_period(PeriodicFunction::parse("sin(2*y)", "2*pi")) == doctest::Approx(pi).epsilon(1e-15));
    CHECK(fundamental_period(PeriodicFunction::parse("cos(3*y) + sin(6*y)", "2*pi")) ==
          doctest::Approx(2 * pi / 3).epsilon(1e-15));
    CHECK(fundamental_period(PeriodicFunction::parse("sin(y)", "6*pi")) == doctest::Approx(2 * pi).epsilon(1e-15));
}

TEST_CASE("class_transform") {
    const auto s = PeriodicFunction::parse("sin(y)", "2*pi");
    auto g = class_transform(s, 2.0, 0.0);
    CHECK(g.period() == doctest::Approx(4 * pi).epsilon(1e-15));
    for (double y : {0.3, 1.0, 5.0}) CHECK(g(y) == doctest::Approx(4 * std::sin(y / 2)).epsilon(1e-15));
    auto zs = find_zeros(g);
    REQUIRE(zs.size() == 2);
    CHECK(zs[0].lambda == doctest::Approx(2.0));
    CHECK(zs[1].lambda == doctest::Approx(-2.0));

    CHECK(structurally_equal(class_transform(s, 1.0, 0.0).expr(), s.expr()));

    // a = -1: sin(-y), lambda values negated; the zero at pi keeps index 1 but
    // the cyclic order (read from the image) is reversed.
    g = class_transform(s, -1.0, 0.0);
    zs = find_zeros(g);
    REQUIRE(zs.size() == 2);
    CHECK(zs[0].lambda == doctest::Approx(-1.0));
    CHECK(zs[1].lambda == doctest::Approx(1.0));
}

TEST_CASE("class_transform: composition law and zero transport") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.4, 2.5), ub(-3.0, 3.0);
    for (const auto& tp : testcorpus::trig_polynomials(6, 17)) {
        const auto& f = tp.f;
        const double a1 = ua(rng) * (rng() % 2 ? 1 : -1), b1 = ub(rng);
        const double a2 = ua(rng) * (rng() % 2 ? 1 : -1), b2 = ub(rng);
        const auto twice = class_transform(class_transform(f, a1, b1), a2, b2);
        const auto once = class_transform(f, a1 * a2, b1 + b2 / a1);
        for (int j = 0; j < 200; ++j) {
            const double y = -10.0 + 0.1 * j;
            CHECK(std::abs(twice(y) - once(y)) <= 1e-10 * (1 + f.max_abs() * a1 * a1 * a2 * a2));
        }

        // Zeros of class_transform(f, a, 0) are a z_i mod |a| P with multipliers a lambda_i.
        const double a = a1;
        const auto g = class_transform(f, a, 0.0);
        const auto zf = find_zeros(f);
        const auto zg = find_zeros(g);
        REQUIRE(zf.size() == zg.size());
        const double Q = g.period();
        for (const ZeroData& z : zf) {
            double w = std::fmod(a * z.z, Q);
            if (w < 0) w += Q;
            bool found = false;
            for (const ZeroData& y : zg) {
                double dz = std::abs(y.z - w);
                dz = std::min(dz, Q - dz);
                if (dz <= 1e-8) {
                    found = true;
                    CHECK(std::abs(y.lambda - a * z.lambda) <= 1e-8);
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("same_class") {
    const auto f = PeriodicFunction::parse("sin(y)*(1+0.3*sin(y)) + 0.1*cos(2*y)", "2*pi");
    const auto g = class_transform(f, -1.7, 0.4);
    auto rel = same_class(f, g);
    REQUIRE(rel.has_value());
    // f is symmetric under y -> pi - y, so a = +1.7 is as valid as -1.7; check the relation itself.
    CHECK(std::abs(rel->a) == doctest::Approx(1.7).epsilon(1e-9));
    for (double y : {0.2, 1.9, 7.0})
        CHECK(g(y) == doctest::Approx(rel->a * rel->a * f(y / rel->a + rel->b)).epsilon(1e-9));
    const auto h = PeriodicFunction::parse("sin(y)*(1+0.3*sin(y)) + 0.1*cos(2*y) + 0.1*sin(2*y)", "2*pi");
    rel = same_class(h, class_transform(h, -1.7, 0.4));
    REQUIRE(rel.has_value());
    CHECK(rel->a == doctest::Approx(-1.7).epsilon(1e-9));
    CHECK(!same_class(PeriodicFunction::parse("sin(y)", "2*pi"), PeriodicFunction::parse("sin(2*y)", "2*pi")));
    CHECK(!same_class(PeriodicFunction::parse("sin(y)", "2*pi"), PeriodicFunction::parse("sin(y)*(1+0.2*sin(y))", "2*pi")));
    CHECK(same_class(PeriodicFunction::parse("sin(y)", "2*pi"), PeriodicFunction::parse("4*sin(y/2)", "4*pi")));
}

TEST_CASE("reflect and translate") {
    const auto f = PeriodicFunction::parse("sin(y)+0.5*cos(2*y)", "2*pi");
    const auto r = reflect(f);
    const auto t = translate(f, 0.3);
    for (double y : {0.1, 2.0, 4.0}) {
        CHECK(r(y) == doctest::Approx(-f(-y)));
        CHECK(t(y) == doctest::Approx(f(y + 0.3)));
    }
}
