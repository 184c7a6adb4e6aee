#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "kconf/funcspace.hpp"
#include "kconf/ode.hpp"

namespace kconf {

// g = f(y) dx^2 + 2 dx dy. Killing field d/dx, det g = -1.
// Curvature convention: R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y],
// K = <R(X,Y)Y, X> / (<X,X><Y,Y> - <X,Y>^2).
class RibbonMetric {
public:
    explicit RibbonMetric(Profile f) : f_(std::move(f)) {}
    explicit RibbonMetric(const PeriodicFunction& f) : f_(f.profile()) {}

    const Profile& profile() const { return f_; }
    double f(double y) const { return f_.f(y); }
    double d1(double y) const { return f_.d1(y); }
    double d2(double y) const { return f_.d2(y); }

private:
    Profile f_;
};

struct GeodesicState {
    double x = 0, y = 0, vx = 0, vy = 0;
};

double clairaut(const RibbonMetric& m, const GeodesicState& s);  // <gamma', d/dx> = f vx + vy
double energy(const RibbonMetric& m, const GeodesicState& s);    // <gamma', gamma'> = f vx^2 + 2 vx vy

// State at height y with the given first integrals, on the branch y' = sign(c) sqrt(c^2 - f E)
// whose x-velocity E / (c + y') stays bounded through zeros of f. Such a geodesic never
// leaves the chart if c^2 > f E on all of its y-range. Throws InvalidArgument if c^2 < f(y) E
// or c = 0.
GeodesicState state_from_integrals(const RibbonMetric& m, double y, double c, double E);

// Seeded states with c^2 > max(f E) over a period on the bounded branch, so the
// geodesics stay in the chart for all time. energy_sign: +1 spacelike, -1 timelike,
// 0 either (|E| <= 1 in all cases).
std::vector<GeodesicState> sample_complete_states(const PeriodicFunction& f, int count, std::uint64_t seed,
                                                  int energy_sign = 0);

// The only non-zero symbols.
struct Christoffels {
    double x_xx = 0;  // Gamma^x_xx = -f'/2
    double y_xx = 0;  // Gamma^y_xx = f f'/2
    double y_xy = 0;  // Gamma^y_xy = Gamma^y_yx = f'/2
};

Christoffels christoffels(const RibbonMetric& m, double y);
double curvature(const RibbonMetric& m, double y);  // f''/2

enum class GeodesicStatus { Completed, LeftWindow, StepUnderflow, MaxSteps, NonFinite };
const char* to_string(GeodesicStatus s);

struct GeodesicSample {
    double t = 0;
    GeodesicState s;
    double clairaut = 0, energy = 0;
};

struct Trajectory {
    std::vector<GeodesicSample> samples;  // every accepted step, starting at t = 0
    GeodesicStatus status = GeodesicStatus::Completed;
    double t_reached = 0;
    double clairaut0 = 0, energy0 = 0;
    double clairaut_drift = 0, energy_drift = 0;  // sup |q(t) - q(0)|

    // Incompleteness signal: the affine parameter could not be continued.
    bool incomplete() const {
        return status == GeodesicStatus::StepUnderflow || status == GeodesicStatus::NonFinite;
    }
    const GeodesicState& final_state() const { return samples.back().s; }
    void write_csv(std::ostream& os) const;  // t,x,y,vx,vy,clairaut,energy
};

struct GeodesicOptions {
    double tol = 1e-12;  // local relative and absolute tolerance, >= 1e-13
    double y_window = std::numeric_limits<double>::infinity();  // stop once |y| exceeds this
    long max_steps = 2'000'000;
};

// t_end may be negative (backward integration). Throws InvalidArgument for tol < 1e-13.
Trajectory integrate_geodesic(const RibbonMetric& m, const GeodesicState& s0, double t_end,
                              const GeodesicOptions& opt = {});

// ---------------------------------------------------------------------------
// Jacobi fields: the linearized geodesic flow, i.e. the Jacobi equation written
// in coordinates (J'' plus Christoffel coupling) rather than reduced to a scalar.

struct JacobiState {
    std::array<double, 2> J{}, dJ{};  // (x, y) components and their t-derivatives
};

struct JacobiSample {
    double t = 0;
    GeodesicState base;
    JacobiState jac;
    double normal = 0;  // (vy Jx - vx Jy) / sqrt|E| = <J, N>, N = (-vx, vy + f vx)/sqrt|E|
};

struct JacobiRun {
    std::vector<JacobiSample> samples;
    GeodesicStatus status = GeodesicStatus::Completed;
    void write_csv(std::ostream& os) const;  // t,J_x,J_y,normal_component
};

// J'' for the linearized flow at (s, j), given that s itself is on a geodesic.
std::array<double, 2> jacobi_acceleration(const RibbonMetric& m, const GeodesicState& s, const JacobiState& j);

// Unit normal to s.v, <N, N> = -sign(E). Throws LightlikeGeodesic if E = 0.
std::array<double, 2> unit_normal(const RibbonMetric& m, const GeodesicState& s);

JacobiRun integrate_jacobi(const RibbonMetric& m, const GeodesicState& s0, const JacobiState& j0, double t_end,
                           double tol = 1e-12);

// First zero after t = 1e-6 of the normal component of J with J(0) = 0, J'(0) = N,
// refined to 1e-8. Throws LightlikeGeodesic when |E| <= 1e-12 (1 + |v|^2).
std::optional<double> first_conjugate_point(const RibbonMetric& m, const GeodesicState& s0, double t_max,
                                            double tol = 1e-12);

struct LightlikeReport {
    bool incomplete = false;           // forward: f'(z) x'(0) > 0
    bool backward_incomplete = false;  // f'(z) x'(0) < 0
    double horizon = std::numeric_limits<double>::infinity();  // 2 / (f'(z) x'(0)), signed
    double z = 0, multiplier = 0, vx0 = 1;
};

// The closed lightlike geodesic y = z with x'(0) = vx0: x'' = (f'(z)/2) x'^2.
// Throws NotAZero when |f(z)| > 1e-9 (1 + |f'(z)|), InvalidArgument when vx0 = 0.
LightlikeReport lightlike_incompleteness(const RibbonMetric& m, double z, double vx0 = 1.0);
inline LightlikeReport lightlike_incompleteness(const RibbonMetric& m, const ZeroData& z, double vx0 = 1.0) {
    return lightlike_incompleteness(m, z.z, vx0);
}

}  // namespace kconf
