// Pratt parser for profile expressions. See docs/grammar.md.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "kconf/errors.hpp"
#include "kconf/expr.hpp"

namespace kconf {

namespace {

std::string join_expected(const std::vector<std::string>& expected) {
    std::string out;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) out += ", ";
        out += expected[i];
    }
    return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail)
    : Error("SyntaxError", "syntax error at byte " + std::to_string(offset) + ": " + detail +
                               (expected.empty() ? std::string() : " (expected " + join_expected(expected) + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

using Kind = Expr::Kind;

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok type;
    std::size_t offset;
    std::string text;
    double number = 0.0;
};

const std::vector<std::string> kOperandStart = {"number", "identifier", "'('", "'-'"};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        if (pos_ >= src_.size()) return {Tok::End, start, ""};
        const char c = src_[pos_];
        switch (c) {
            case '+': ++pos_; return {Tok::Plus, start, "+"};
            case '-': ++pos_; return {Tok::Minus, start, "-"};
            case '*': ++pos_; return {Tok::Star, start, "*"};
            case '/': ++pos_; return {Tok::Slash, start, "/"};
            case '^': ++pos_; return {Tok::Caret, start, "^"};
            case '(': ++pos_; return {Tok::LParen, start, "("};
            case ')': ++pos_; return {Tok::RParen, start, ")"};
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(start);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            return {Tok::Ident, start, std::string(src_.substr(start, pos_ - start))};
        }
        throw SyntaxError(start, kOperandStart, "unexpected character");
    }

private:
    Token number(std::size_t start) {
        bool digits = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
            digits = true;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                digits = true;
            }
        }
        if (!digits) throw SyntaxError(start, {"digit"}, "malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[p])))
                throw SyntaxError(p, {"digit"}, "malformed exponent");
            while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
            pos_ = p;
        }
        const std::string text(src_.substr(start, pos_ - start));
        const double v = std::strtod(text.c_str(), nullptr);
        if (!std::isfinite(v)) throw SyntaxError(start, {"finite number"}, "number out of range");
        return {Tok::Number, start, text, v};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

bool is_reserved(const std::string& name) {
    return name == "pi" || name == "sin" || name == "cos" || name == "exp" || name == "ln";
}

std::optional<Kind> function_kind(const std::string& name) {
    if (name == "sin") return Kind::Sin;
    if (name == "cos") return Kind::Cos;
    if (name == "exp") return Kind::Exp;
    if (name == "ln") return Kind::Ln;
    return std::nullopt;
}

int left_power(Tok t) {
    switch (t) {
        case Tok::Plus:
        case Tok::Minus: return 10;
        case Tok::Star:
        case Tok::Slash: return 20;
        case Tok::Caret: return 40;
        default: return 0;
    }
}

constexpr int kUnaryPower = 30;

// Parser builds raw nodes; the only folding is -(constant) -> negative constant,
// which keeps printed negative literals round-trippable.
class Parser {
public:
    Parser(std::string_view src, std::optional<std::string> variable)
        : lexer_(src), variable_(std::move(variable)), fixed_(variable_.has_value()) {
        if (variable_ && is_reserved(*variable_))
            throw UnknownIdentifier("reserved name cannot be the variable: " + *variable_);
        advance();
    }

    Expr parse() {
        Expr e = expression(0);
        if (tok_.type != Tok::End) {
            std::vector<std::string> expected = {"operator"};
            if (depth_ == 0) expected.push_back("end of input");
            throw SyntaxError(tok_.offset, expected, "unexpected '" + tok_.text + "'");
        }
        return e;
    }

private:
    void advance() { tok_ = lexer_.next(); }

    void expect(Tok t, const char* what) {
        if (tok_.type != t) {
            throw SyntaxError(tok_.offset, {what},
                              tok_.type == Tok::End ? "unexpected end of input" : "unexpected '" + tok_.text + "'");
        }
        advance();
    }

    Expr expression(int rbp) {
        Expr left = prefix();
        while (left_power(tok_.type) > rbp) {
            const Token op = tok_;
            advance();
            left = infix(op, left);
        }
        return left;
    }

    Expr prefix() {
        const Token t = tok_;
        switch (t.type) {
            case Tok::Number: advance(); return Expr::constant(t.number);
            case Tok::Minus: {
                advance();
                Expr arg = expression(kUnaryPower);
                if (arg.is_constant()) return Expr::constant(-arg.value());
                return Expr::unary(Kind::Neg, arg);
            }
            case Tok::LParen: {
                advance();
                ++depth_;
                Expr inner = expression(0);
                expect(Tok::RParen, "')'");
                --depth_;
                return inner;
            }
            case Tok::Ident: return identifier(t);
            case Tok::End: throw SyntaxError(t.offset, kOperandStart, "unexpected end of input");
            default: throw SyntaxError(t.offset, kOperandStart, "unexpected '" + t.text + "'");
        }
    }

    Expr identifier(const Token& t) {
        advance();
        if (auto fk = function_kind(t.text)) {
            expect(Tok::LParen, "'('");
            ++depth_;
            Expr arg = expression(0);
            expect(Tok::RParen, "')'");
            --depth_;
            return Expr::unary(*fk, arg);
        }
        if (t.text == "pi") return Expr::constant(std::numbers::pi);
        if (!variable_) {
            variable_ = t.text;
        } else if (*variable_ != t.text) {
            throw UnknownIdentifier("unknown identifier '" + t.text + "' at byte " + std::to_string(t.offset) +
                                    (fixed_ ? " (variable is '" : " (variable already '") + *variable_ + "')");
        }
        return Expr::variable(t.text);
    }

    Expr infix(const Token& op, const Expr& left) {
        switch (op.type) {
            case Tok::Plus: return Expr::binary(Kind::Add, left, expression(10));
            case Tok::Minus: return Expr::binary(Kind::Sub, left, expression(10));
            case Tok::Star: return Expr::binary(Kind::Mul, left, expression(20));
            case Tok::Slash: return Expr::binary(Kind::Div, left, expression(20));
            case Tok::Caret: {
                const std::size_t at = tok_.offset;
                Expr ex = expression(39);
                if (!ex.variable_name().empty())
                    throw SyntaxError(at, {"integer exponent"}, "exponent must be constant");
                double v = 0.0;
                try {
                    v = evaluate(ex, 0.0);
                } catch (const DomainError&) {
                    throw SyntaxError(at, {"integer exponent"}, "exponent is not a finite number");
                }
                if (v != std::round(v) || std::abs(v) > 1024.0)
                    throw SyntaxError(at, {"integer exponent"}, "exponent must be an integer in [-1024, 1024]");
                return Expr::power(left, static_cast<int>(v));
            }
            default: throw SyntaxError(op.offset, {"operator"}, "unexpected '" + op.text + "'");
        }
    }

    Lexer lexer_;
    Token tok_{Tok::End, 0, ""};
    std::optional<std::string> variable_;
    bool fixed_;
    int depth_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view src, std::optional<std::string> variable) {
    return Parser(src, std::move(variable)).parse();
}

}  // namespace kconf
