#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kconf/errors.hpp"
#include "kconf/expr.hpp"

using namespace kconf;
using Kind = Expr::Kind;

TEST_CASE("parse: basic shapes") {
    Expr e = parse_expr("y");
    CHECK(e.kind() == Kind::Variable);
    CHECK(e.name() == "y");

    e = parse_expr("4*sin(t)");
    REQUIRE(e.kind() == Kind::Mul);
    CHECK(e.lhs().is_constant(4.0));
    CHECK(e.rhs().kind() == Kind::Sin);
    CHECK(e.rhs().lhs().name() == "t");

    e = parse_expr("sin(y)*(1+0.2*sin(y))");
    CHECK(e.kind() == Kind::Mul);
    CHECK(e.variable_name() == "y");
    CHECK(evaluate(e, 0.5) == doctest::Approx(std::sin(0.5) * (1 + 0.2 * std::sin(0.5))));
}

TEST_CASE("parse: precedence and associativity") {
    CHECK(evaluate(parse_expr("1 + 2 * 3"), 0) == 7);
    CHECK(evaluate(parse_expr("2 ^ 3 ^ 2"), 0) == 512);
    CHECK(evaluate(parse_expr("-y^2"), 3) == -9);
    CHECK(evaluate(parse_expr("(-y)^2"), 3) == 9);
    CHECK(evaluate(parse_expr("8 / 4 / 2"), 0) == 1);
    CHECK(evaluate(parse_expr("8 - 4 - 2"), 0) == 2);
    CHECK(evaluate(parse_expr("2*-y"), 3) == -6);
    CHECK(evaluate(parse_expr("y^-2"), 2) == 0.25);
    CHECK(evaluate(parse_expr("y^(1+1)"), 3) == 9);
    CHECK(evaluate(parse_expr("  2 *\tpi "), 0) == 2 * std::numbers::pi);
    CHECK(evaluate(parse_expr("1.5e1"), 0) == 15);
}

TEST_CASE("parse: errors") {
    try {
        parse_expr("2y");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 1);
        CHECK(!e.expected().empty());
    }
    try {
        parse_expr("1 + ");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse_expr("sin y"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("(y"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("y)"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("y^y"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("y^0.5"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("y # 2"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("x + y"), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expr("tan(y)"), SyntaxError);  // 'tan' becomes the variable, then '(' is unexpected
    CHECK_THROWS_AS(parse_expr("sin(t)", "y"), UnknownIdentifier);
    CHECK_NOTHROW(parse_expr("sin(y)", "y"));
}

TEST_CASE("evaluate") {
    CHECK(evaluate(parse_expr("sin(y)"), std::numbers::pi / 2) == 1.0);
    CHECK(evaluate(parse_expr("4*sin(y)"), std::numbers::pi / 6) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(evaluate(parse_expr("1/y"), 0.0), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expr("ln(y)"), 0.0), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expr("ln(y)"), -1.0), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expr("exp(y)"), 1000.0), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expr("y^-1"), 0.0), DomainError);
}

TEST_CASE("differentiate: closed forms") {
    Expr d = differentiate(parse_expr("sin(y)"));
    CHECK(d.kind() == Kind::Cos);
    CHECK(differentiate(parse_expr("3.5")).is_constant(0.0));
    CHECK(differentiate(parse_expr("y")).is_constant(1.0));

    // f_b' = cos(y)(1+2b sin y)
    const double b = 0.37;
    Expr fb = sin(Expr::variable("y")) * (Expr::constant(1.0) + Expr::constant(b) * sin(Expr::variable("y")));
    Expr dfb = differentiate(fb);
    for (double y : {-2.0, 0.0, 0.3, 1.7, 4.0}) {
        CHECK(evaluate(dfb, y) == doctest::Approx(std::cos(y) * (1 + 2 * b * std::sin(y))).epsilon(1e-14));
    }
    // Folding keeps constants cheap.
    CHECK(differentiate(differentiate(differentiate(parse_expr("y^2")))).is_constant(0.0));
    CHECK(differentiate(parse_expr("2*y")).is_constant(2.0));
}

namespace {

// Random trees over the full grammar; domain-safe (ln and division guarded).
Expr random_tree(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 10);
    std::uniform_real_distribution<double> cst(-3.0, 3.0);
    const Expr y = Expr::variable("y");
    switch (pick(rng)) {
        case 0: return Expr::constant(std::round(cst(rng) * 100) / 100);
        case 1: return y;
        case 2: return Expr::binary(Kind::Add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        case 3: return Expr::binary(Kind::Sub, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        case 4: return Expr::binary(Kind::Mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        case 5:
            return Expr::binary(Kind::Div, random_tree(rng, depth - 1),
                                Expr::binary(Kind::Add, Expr::constant(2.5),
                                             Expr::unary(Kind::Sin, random_tree(rng, depth - 1))));
        case 6: return Expr::power(random_tree(rng, depth - 1), std::uniform_int_distribution<int>(-2, 3)(rng));
        case 7: return Expr::unary(Kind::Neg, Expr::unary(Kind::Cos, random_tree(rng, depth - 1)));
        case 8: return Expr::unary(Kind::Sin, random_tree(rng, depth - 1));
        case 9: return Expr::unary(Kind::Exp, Expr::unary(Kind::Sin, random_tree(rng, depth - 1)));
        default:
            return Expr::unary(Kind::Ln, Expr::binary(Kind::Add, Expr::constant(1.5),
                                                      Expr::unary(Kind::Cos, random_tree(rng, depth - 1))));
    }
}

}  // namespace

TEST_CASE("print/parse round trip") {
    std::mt19937_64 rng(7);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        // Go through the parser once so the tree is in parser-canonical form.
        const Expr raw = random_tree(rng, 4);
        const Expr e = parse_expr(to_string(raw));
        const Expr again = parse_expr(to_string(e));
        CHECK(structurally_equal(e, again));
        CHECK(to_string(e) == to_string(again));
        ++checked;
    }
    CHECK(checked == 500);
    for (const char* s : {"-2", "y^-3", "-(y)", "--y", "pi", "1e300*y", "-0", "0.1+0.2"}) {
        const Expr e = parse_expr(s);
        CHECK(structurally_equal(e, parse_expr(to_string(e))));
    }
}

TEST_CASE("differentiate agrees with central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pt(-3.0, 3.0);
    int compared = 0;
    for (int i = 0; i < 300; ++i) {
        const Expr e = random_tree(rng, 3);
        const Expr d = differentiate(e);
        for (int j = 0; j < 5; ++j) {
            const double y = pt(rng);
            const double h = 1e-6;
            double fd = 0, exact = 0;
            try {
                exact = evaluate(d, y);
                // Fourth-order stencil so truncation stays far below the tolerance.
                fd = (evaluate(e, y - 2 * h) - 8 * evaluate(e, y - h) + 8 * evaluate(e, y + h) -
                      evaluate(e, y + 2 * h)) /
                     (12 * h);
            } catch (const DomainError&) {
                continue;
            }
            // Skip near-singular points where roundoff dominates.
            const double scale = std::abs(evaluate(e, y)) + std::abs(exact) + 1.0;
            if (scale > 1e4) continue;
            CHECK(std::abs(fd - exact) <= 1e-6 * scale);
            ++compared;
        }
    }
    CHECK(compared > 1000);
}

TEST_CASE("three derivatives always succeed, compiled evaluation is bit-identical") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Expr e = random_tree(rng, 4);
        const Expr d3 = differentiate(differentiate(differentiate(e)));
        const CompiledExpr ce(e), cd3(d3);
        for (double y : {-1.3, 0.0, 0.7, 2.9}) {
            double a = 0, b = 0;
            bool ea = false, eb = false;
            try { a = evaluate(e, y); } catch (const DomainError&) { ea = true; }
            try { b = ce(y); } catch (const DomainError&) { eb = true; }
            CHECK(ea == eb);
            if (!ea) CHECK(std::memcmp(&a, &b, sizeof a) == 0);
            ea = eb = false;
            try { a = evaluate(d3, y); } catch (const DomainError&) { ea = true; }
            try { b = cd3(y); } catch (const DomainError&) { eb = true; }
            CHECK(ea == eb);
            if (!ea) CHECK(std::memcmp(&a, &b, sizeof a) == 0);
        }
    }
}

TEST_CASE("substitute") {
    const Expr f = parse_expr("sin(y)");
    const Expr g = substitute(f, Expr::variable("y") / Expr::constant(2.0) + Expr::constant(1.0));
    CHECK(evaluate(g, 0.8) == doctest::Approx(std::sin(1.4)).epsilon(1e-15));
    CHECK(substitute(f, Expr::constant(0.0)).is_constant(0.0));
}
