#include "kconf/expr.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "kconf/errors.hpp"

namespace kconf {

struct Expr::Node {
    Kind kind = Kind::Constant;
    double value = 0.0;
    int exponent = 0;
    std::string name;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using Kind = Expr::Kind;

bool is_binary(Kind k) {
    return k == Kind::Add || k == Kind::Sub || k == Kind::Mul || k == Kind::Div;
}

const char* function_name(Kind k) {
    switch (k) {
        case Kind::Sin: return "sin";
        case Kind::Cos: return "cos";
        case Kind::Exp: return "exp";
        case Kind::Ln: return "ln";
        default: return "?";
    }
}

const char* operator_symbol(Kind k) {
    switch (k) {
        case Kind::Add: return " + ";
        case Kind::Sub: return " - ";
        case Kind::Mul: return " * ";
        case Kind::Div: return " / ";
        default: return "?";
    }
}

// Exponentiation by squaring; shared by both evaluators so results match bit for bit.
double int_power(double base, int n) {
    if (n == 0) return 1.0;
    if (n < 0) {
        if (base == 0.0) throw DomainError("negative power of zero");
        return 1.0 / int_power(base, -n);
    }
    double result = 1.0;
    double b = base;
    unsigned m = static_cast<unsigned>(n);
    while (m != 0) {
        if (m & 1u) result *= b;
        b *= b;
        m >>= 1u;
    }
    return result;
}

double apply_binary(Kind k, double x, double y) {
    switch (k) {
        case Kind::Add: return x + y;
        case Kind::Sub: return x - y;
        case Kind::Mul: return x * y;
        case Kind::Div:
            if (y == 0.0) throw DomainError("division by zero");
            return x / y;
        default: throw DomainError("bad binary operator");
    }
}

double apply_unary(Kind k, double x) {
    switch (k) {
        case Kind::Neg: return -x;
        case Kind::Sin: return std::sin(x);
        case Kind::Cos: return std::cos(x);
        case Kind::Exp: return std::exp(x);
        case Kind::Ln:
            if (!(x > 0.0)) throw DomainError("ln of nonpositive value");
            return std::log(x);
        default: throw DomainError("bad unary operator");
    }
}

double checked(double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite value");
    return v;
}

std::optional<double> try_fold_unary(Kind k, double x) {
    if (k == Kind::Ln && !(x > 0.0)) return std::nullopt;
    const double v = apply_unary(k, x);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<double> try_fold_binary(Kind k, double x, double y) {
    if (k == Kind::Div && y == 0.0) return std::nullopt;
    const double v = apply_binary(k, x, y);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = std::move(lhs.node_);
    n->b = std::move(rhs.node_);
    return Expr(std::move(n));
}

Expr Expr::unary(Kind kind, Expr arg) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = std::move(arg.node_);
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->exponent = exponent;
    n->a = std::move(base.node_);
    return Expr(std::move(n));
}

Expr::Kind Expr::kind() const noexcept { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::exponent() const { return node_->exponent; }
const std::string& Expr::name() const { return node_->name; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }

bool Expr::is_constant(double v) const noexcept {
    return node_->kind == Kind::Constant && node_->value == v;
}

std::string Expr::variable_name() const {
    switch (kind()) {
        case Kind::Constant: return {};
        case Kind::Variable: return name();
        default: break;
    }
    std::string left = lhs().variable_name();
    if (!left.empty() || !is_binary(kind())) return left;
    return rhs().variable_name();
}

std::size_t Expr::node_count() const {
    std::size_t count = 1;
    if (node_->a) count += lhs().node_count();
    if (node_->b) count += rhs().node_count();
    return count;
}

// ---------------------------------------------------------------------------
// Folding builders

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto v = try_fold_binary(Kind::Add, a.value(), b.value())) return Expr::constant(*v);
    }
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return Expr::binary(Kind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto v = try_fold_binary(Kind::Sub, a.value(), b.value())) return Expr::constant(*v);
    }
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    return Expr::binary(Kind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto v = try_fold_binary(Kind::Mul, a.value(), b.value())) return Expr::constant(*v);
    }
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return -b;
    if (b.is_constant(-1.0)) return -a;
    return Expr::binary(Kind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto v = try_fold_binary(Kind::Div, a.value(), b.value())) return Expr::constant(*v);
    }
    if (b.is_constant(1.0)) return a;
    if (b.is_constant(-1.0)) return -a;
    return Expr::binary(Kind::Div, a, b);
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.value());
    if (a.kind() == Kind::Neg) return a.lhs();
    return Expr::unary(Kind::Neg, a);
}

Expr pow(const Expr& base, int exponent) {
    if (exponent == 0) return Expr::constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant() && !(base.value() == 0.0 && exponent < 0)) {
        const double v = int_power(base.value(), exponent);
        if (std::isfinite(v)) return Expr::constant(v);
    }
    return Expr::power(base, exponent);
}

namespace {

Expr fold_function(Kind k, const Expr& a) {
    if (a.is_constant()) {
        if (auto v = try_fold_unary(k, a.value())) return Expr::constant(*v);
    }
    return Expr::unary(k, a);
}

}  // namespace

Expr sin(const Expr& a) { return fold_function(Kind::Sin, a); }
Expr cos(const Expr& a) { return fold_function(Kind::Cos, a); }
Expr exp(const Expr& a) { return fold_function(Kind::Exp, a); }
Expr ln(const Expr& a) { return fold_function(Kind::Ln, a); }

// ---------------------------------------------------------------------------

Expr differentiate(const Expr& e) {
    switch (e.kind()) {
        case Kind::Constant: return Expr::constant(0.0);
        case Kind::Variable: return Expr::constant(1.0);
        case Kind::Add: return differentiate(e.lhs()) + differentiate(e.rhs());
        case Kind::Sub: return differentiate(e.lhs()) - differentiate(e.rhs());
        case Kind::Mul: {
            const Expr u = e.lhs(), v = e.rhs();
            return differentiate(u) * v + u * differentiate(v);
        }
        case Kind::Div: {
            const Expr u = e.lhs(), v = e.rhs();
            return (differentiate(u) * v - u * differentiate(v)) / pow(v, 2);
        }
        case Kind::Pow: {
            const Expr u = e.lhs();
            const int n = e.exponent();
            return Expr::constant(n) * pow(u, n - 1) * differentiate(u);
        }
        case Kind::Neg: return -differentiate(e.lhs());
        case Kind::Sin: return cos(e.lhs()) * differentiate(e.lhs());
        case Kind::Cos: return -(sin(e.lhs()) * differentiate(e.lhs()));
        case Kind::Exp: return e * differentiate(e.lhs());
        case Kind::Ln: return differentiate(e.lhs()) / e.lhs();
    }
    return Expr::constant(0.0);
}

double evaluate(const Expr& e, double y) {
    const Kind k = e.kind();
    switch (k) {
        case Kind::Constant: return e.value();
        case Kind::Variable: return y;
        case Kind::Pow: return checked(int_power(evaluate(e.lhs(), y), e.exponent()));
        default: break;
    }
    if (is_binary(k)) {
        const double x = evaluate(e.lhs(), y);
        const double z = evaluate(e.rhs(), y);
        return checked(apply_binary(k, x, z));
    }
    return checked(apply_unary(k, evaluate(e.lhs(), y)));
}

Expr substitute(const Expr& e, const Expr& replacement) {
    switch (e.kind()) {
        case Kind::Constant: return e;
        case Kind::Variable: return replacement;
        case Kind::Add: return substitute(e.lhs(), replacement) + substitute(e.rhs(), replacement);
        case Kind::Sub: return substitute(e.lhs(), replacement) - substitute(e.rhs(), replacement);
        case Kind::Mul: return substitute(e.lhs(), replacement) * substitute(e.rhs(), replacement);
        case Kind::Div: return substitute(e.lhs(), replacement) / substitute(e.rhs(), replacement);
        case Kind::Pow: return pow(substitute(e.lhs(), replacement), e.exponent());
        case Kind::Neg: return -substitute(e.lhs(), replacement);
        default: return fold_function(e.kind(), substitute(e.lhs(), replacement));
    }
}

std::string to_string(const Expr& e) {
    const Kind k = e.kind();
    switch (k) {
        case Kind::Constant: {
            const double v = e.value();
            if (std::signbit(v)) return "(-" + format_number(-v) + ")";
            return format_number(v);
        }
        case Kind::Variable: return e.name();
        case Kind::Neg: return "(-" + to_string(e.lhs()) + ")";
        case Kind::Pow: {
            const int n = e.exponent();
            const std::string exponent =
                n < 0 ? "(-" + std::to_string(-static_cast<long long>(n)) + ")" : std::to_string(n);
            return "(" + to_string(e.lhs()) + "^" + exponent + ")";
        }
        default: break;
    }
    if (is_binary(k)) {
        return "(" + to_string(e.lhs()) + operator_symbol(k) + to_string(e.rhs()) + ")";
    }
    return std::string(function_name(k)) + "(" + to_string(e.lhs()) + ")";
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Kind::Constant: return a.value() == b.value() && std::signbit(a.value()) == std::signbit(b.value());
        case Kind::Variable: return a.name() == b.name();
        case Kind::Pow: return a.exponent() == b.exponent() && structurally_equal(a.lhs(), b.lhs());
        default: break;
    }
    if (!structurally_equal(a.lhs(), b.lhs())) return false;
    return !is_binary(a.kind()) || structurally_equal(a.rhs(), b.rhs());
}

// ---------------------------------------------------------------------------

CompiledExpr::CompiledExpr(const Expr& e) {
    std::size_t depth = 0;
    std::function<void(const Expr&)> emit = [&](const Expr& node) {
        const Kind k = node.kind();
        if (k == Kind::Constant || k == Kind::Variable) {
            ops_.push_back({k, 0, k == Kind::Constant ? node.value() : 0.0});
            ++depth;
            max_depth_ = std::max(max_depth_, depth);
            return;
        }
        emit(node.lhs());
        if (is_binary(k)) {
            emit(node.rhs());
            --depth;
        }
        ops_.push_back({k, k == Kind::Pow ? node.exponent() : 0, 0.0});
    };
    emit(e);
}

double CompiledExpr::operator()(double y) const {
    constexpr std::size_t kInline = 64;
    double inline_stack[kInline] = {};
    std::vector<double> heap_stack;
    double* stack = inline_stack;
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }
    std::size_t top = 0;
    for (const Op& op : ops_) {
        switch (op.kind) {
            case Kind::Constant: stack[top++] = op.value; break;
            case Kind::Variable: stack[top++] = y; break;
            case Kind::Pow: stack[top - 1] = checked(int_power(stack[top - 1], op.exponent)); break;
            case Kind::Add:
            case Kind::Sub:
            case Kind::Mul:
            case Kind::Div:
                --top;
                stack[top - 1] = checked(apply_binary(op.kind, stack[top - 1], stack[top]));
                break;
            default: stack[top - 1] = checked(apply_unary(op.kind, stack[top - 1])); break;
        }
    }
    return stack[0];
}

}  // namespace kconf
