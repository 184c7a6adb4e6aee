#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kconf {

// Immutable expression tree over a single free variable. Nodes are shared
// between trees, so copies are cheap and concurrent evaluation is safe.
class Expr {
public:
    enum class Kind : std::uint8_t {
        Constant,
        Variable,
        Add,
        Sub,
        Mul,
        Div,
        Pow,  // integer exponent
        Neg,
        Sin,
        Cos,
        Exp,
        Ln,
    };

    // The constant 0.
    Expr();

    // Raw constructors: no folding. The parser uses these so that printing
    // and reparsing reproduces the same tree.
    static Expr constant(double value);
    static Expr variable(std::string name);
    static Expr binary(Kind kind, Expr lhs, Expr rhs);
    static Expr unary(Kind kind, Expr arg);
    static Expr power(Expr base, int exponent);

    Kind kind() const noexcept;
    double value() const;      // Constant only
    int exponent() const;      // Pow only
    const std::string& name() const;  // Variable only
    Expr lhs() const;          // binary nodes, Pow base, unary argument
    Expr rhs() const;          // binary nodes only

    bool is_constant() const noexcept { return kind() == Kind::Constant; }
    bool is_constant(double v) const noexcept;

    // Name of the free variable, or empty when the tree is constant.
    std::string variable_name() const;

    std::size_t node_count() const;

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

// Folding builders. Constant subtrees collapse, and the neutral/absorbing
// identities (x+0, x*1, x*0, x^1, x^0, --x) are applied.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr ln(const Expr& a);

// Grammar (see docs/grammar.md): + - lowest, then * /, then unary minus,
// then ^ with an integer exponent. Functions: sin cos exp ln. Constant: pi.
// If `variable` is given, any other identifier is rejected; otherwise the
// first non-reserved identifier becomes the variable.
Expr parse_expr(std::string_view src, std::optional<std::string> variable = std::nullopt);

Expr differentiate(const Expr& e);

// Throws DomainError on division by zero, ln of a nonpositive number, or a
// non-finite result.
double evaluate(const Expr& e, double y);

// Replaces the free variable by `replacement`, folding constants.
Expr substitute(const Expr& e, const Expr& replacement);

// Fully parenthesized form; parse_expr(to_string(e)) is structurally equal to e
// for every tree the parser can produce.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

// Flattened postfix program; evaluates bit-identically to evaluate().
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const Expr& e);

    double operator()(double y) const;

private:
    struct Op {
        Expr::Kind kind;
        int exponent;
        double value;
    };
    std::vector<Op> ops_;
    std::size_t max_depth_ = 0;
};

}  // namespace kconf
