#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kconf/expr.hpp"

namespace kconf {

// A smooth function of one variable with its first three derivatives,
// compiled for fast pointwise evaluation. No periodicity is assumed.
class Profile {
public:
    explicit Profile(const Expr& e);
    static Profile parse(std::string_view src);

    const Expr& expr() const { return impl_->e[0]; }
    const Expr& derivative_expr(int order) const { return impl_->e.at(static_cast<std::size_t>(order)); }

    double f(double y) const { return impl_->c[0](y); }
    double d1(double y) const { return impl_->c[1](y); }
    double d2(double y) const { return impl_->c[2](y); }
    double d3(double y) const { return impl_->c[3](y); }
    double operator()(double y) const { return f(y); }

    std::string variable() const;

private:
    struct Impl {
        std::vector<Expr> e;
        std::vector<CompiledExpr> c;
    };
    std::shared_ptr<const Impl> impl_;
};

// Profile with a declared period P. Construction verifies
// |f(y+P) - f(y)| <= 1e-10 (1 + max|f|) on a 4096-point grid.
class PeriodicFunction {
public:
    static constexpr int kCheckGrid = 4096;

    static PeriodicFunction create(const Expr& e, double period);
    // Both strings go through the expression parser; the period must be constant.
    static PeriodicFunction parse(std::string_view expr, std::string_view period);

    const Profile& profile() const { return impl_->profile; }
    const Expr& expr() const { return impl_->profile.expr(); }
    double period() const { return impl_->period; }
    double max_abs() const { return impl_->max_abs; }  // grid estimate of max|f|

    double f(double y) const { return impl_->profile.f(y); }
    double d1(double y) const { return impl_->profile.d1(y); }
    double d2(double y) const { return impl_->profile.d2(y); }
    double d3(double y) const { return impl_->profile.d3(y); }
    double operator()(double y) const { return f(y); }

    std::string to_string() const;

private:
    struct Impl {
        Profile profile;
        double period;
        double max_abs;
    };
    explicit PeriodicFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

double parse_constant(std::string_view src);

struct ZeroData {
    double z = 0.0;       // in [0, P)
    double lambda = 0.0;  // f'(z)
    bool simple = false;
};

struct ZeroOptions {
    double tau_simple = 1e-8;
    int grid = 4096;
    int max_refinements = 6;
    bool require_hyperbolic = false;  // throw NonHyperbolic on a non-simple zero
};

// All zeros in [0, P), ascending. Sign changes (and exact grid zeros) are
// bracketed on a grid that is doubled until the zero count is stable;
// near-tangential dips are minimized and reported as non-simple zeros.
std::vector<ZeroData> find_zeros(const PeriodicFunction& f, const ZeroOptions& opt = {});

// Smallest P/k, k in 1..64, that is a period to 1e-9 max(1, max|f|) on the grid.
double fundamental_period(const PeriodicFunction& f);

// g(y) = a^2 f(y/a + b), declared period |a| P.
PeriodicFunction class_transform(const PeriodicFunction& f, double a, double b);

// -f(-y): the push-forward of f d/dy under y -> -y.
PeriodicFunction reflect(const PeriodicFunction& f);

// Translation f(y + c), same period.
PeriodicFunction translate(const PeriodicFunction& f, double c);

struct ClassRelation {
    double a;
    double b;
};

// Finds (a, b) with g(y) = a^2 f(y/a + b) if the two are in the same class,
// checked on a grid to 1e-8 (1 + max|g|).
std::optional<ClassRelation> same_class(const PeriodicFunction& f, const PeriodicFunction& g);

}  // namespace kconf
