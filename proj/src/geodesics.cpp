#include "kconf/geodesics.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "kconf/errors.hpp"

namespace kconf {

double clairaut(const RibbonMetric& m, const GeodesicState& s) { return m.f(s.y) * s.vx + s.vy; }

double energy(const RibbonMetric& m, const GeodesicState& s) { return m.f(s.y) * s.vx * s.vx + 2 * s.vx * s.vy; }

GeodesicState state_from_integrals(const RibbonMetric& m, double y, double c, double E) {
    const double D = c * c - m.f(y) * E;
    if (c == 0.0 || !(D >= 0)) throw InvalidArgument("no real state with these first integrals");
    const double vy = std::copysign(std::sqrt(D), c);
    return {0.0, y, E / (c + vy), vy};
}

std::vector<GeodesicState> sample_complete_states(const PeriodicFunction& f, int count, std::uint64_t seed,
                                                  int energy_sign) {
    std::mt19937_64 rng(seed);
    const double P = f.period();
    std::uniform_real_distribution<double> uy(0, P), ue(-1, 1), um(0.05, 1.0), us(0, 1);
    const RibbonMetric m(f);
    std::vector<GeodesicState> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) {
        double E = ue(rng);
        if (energy_sign != 0) E = std::copysign(std::max(std::abs(E), 1e-3), static_cast<double>(energy_sign));
        double top = 0;
        for (int i = 0; i < 512; ++i) top = std::max(top, f(P * i / 512) * E);
        const double c = std::sqrt(1.02 * top + um(rng)) * (us(rng) < 0.5 ? -1 : 1);
        out.push_back(state_from_integrals(m, uy(rng), c, E));
    }
    return out;
}

Christoffels christoffels(const RibbonMetric& m, double y) {
    const double f = m.f(y), fp = m.d1(y);
    return {-fp / 2, f * fp / 2, fp / 2};
}

double curvature(const RibbonMetric& m, double y) { return m.d2(y) / 2; }

const char* to_string(GeodesicStatus s) {
    switch (s) {
        case GeodesicStatus::Completed: return "completed";
        case GeodesicStatus::LeftWindow: return "left_window";
        case GeodesicStatus::StepUnderflow: return "step_underflow";
        case GeodesicStatus::MaxSteps: return "max_steps";
        case GeodesicStatus::NonFinite: return "non_finite";
    }
    return "?";
}

namespace {

GeodesicStatus from_ode(OdeStatus s) {
    switch (s) {
        case OdeStatus::Completed: return GeodesicStatus::Completed;
        case OdeStatus::StepUnderflow: return GeodesicStatus::StepUnderflow;
        case OdeStatus::MaxSteps: return GeodesicStatus::MaxSteps;
        case OdeStatus::NonFinite: return GeodesicStatus::NonFinite;
        case OdeStatus::Stopped: return GeodesicStatus::LeftWindow;
    }
    return GeodesicStatus::NonFinite;
}

void check_tol(double tol) {
    if (!(tol >= 1e-13)) throw InvalidArgument("tolerance must be >= 1e-13");
}

// x'' = (f'/2) x'^2,  y'' = -(f f'/2) x'^2 - f' x' y'
void geodesic_rhs(const RibbonMetric& m, const double* s, double* ds) {
    const double f = m.f(s[1]), fp = m.d1(s[1]);
    const double vx = s[2], vy = s[3];
    ds[0] = vx;
    ds[1] = vy;
    ds[2] = fp / 2 * vx * vx;
    ds[3] = -f * fp / 2 * vx * vx - fp * vx * vy;
}

GeodesicState state_of(const double* s) { return {s[0], s[1], s[2], s[3]}; }

double normal_component(const GeodesicState& b, double jx, double jy, double scale) {
    return (b.vy * jx - b.vx * jy) / scale;
}

}  // namespace

Trajectory integrate_geodesic(const RibbonMetric& m, const GeodesicState& s0, double t_end,
                              const GeodesicOptions& opt) {
    check_tol(opt.tol);
    using Solver = Dopri5<4>;
    Trajectory tr;
    tr.clairaut0 = clairaut(m, s0);
    tr.energy0 = energy(m, s0);
    tr.samples.push_back({0.0, s0, tr.clairaut0, tr.energy0});

    const auto rhs = [&m](double, const Solver::State& s, Solver::State& ds) { geodesic_rhs(m, s.data(), ds.data()); };
    bool left = false;
    const auto observer = [&](const Solver::Step& step) {
        const GeodesicState s = state_of(step.y1.data());
        const double c = clairaut(m, s), e = energy(m, s);
        tr.samples.push_back({step.t1, s, c, e});
        tr.clairaut_drift = std::max(tr.clairaut_drift, std::abs(c - tr.clairaut0));
        tr.energy_drift = std::max(tr.energy_drift, std::abs(e - tr.energy0));
        if (std::abs(s.y) > opt.y_window) {
            left = true;
            return false;
        }
        return true;
    };
    OdeOptions o;
    o.rtol = o.atol = opt.tol;
    o.max_steps = opt.max_steps;
    const auto res = Solver::integrate(rhs, 0.0, {s0.x, s0.y, s0.vx, s0.vy}, t_end, o, observer);
    tr.status = left ? GeodesicStatus::LeftWindow : from_ode(res.status);
    tr.t_reached = res.t;
    return tr;
}

void Trajectory::write_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "t,x,y,vx,vy,clairaut,energy\n";
    for (const auto& p : samples)
        os << p.t << ',' << p.s.x << ',' << p.s.y << ',' << p.s.vx << ',' << p.s.vy << ',' << p.clairaut << ','
           << p.energy << '\n';
    os.precision(old);
}

std::array<double, 2> unit_normal(const RibbonMetric& m, const GeodesicState& s) {
    const double E = energy(m, s);
    if (E == 0.0) throw LightlikeGeodesic("lightlike velocity has no unit normal");
    const double k = 1 / std::sqrt(std::abs(E));
    return {-s.vx * k, (s.vy + m.f(s.y) * s.vx) * k};
}

// Derivative of the geodesic right-hand side along (Jx, Jy, Jx', Jy'); nothing depends on x.
std::array<double, 2> jacobi_acceleration(const RibbonMetric& m, const GeodesicState& s, const JacobiState& j) {
    const double f = m.f(s.y), fp = m.d1(s.y), fpp = m.d2(s.y);
    const double vx = s.vx, vy = s.vy, Jy = j.J[1], Jvx = j.dJ[0], Jvy = j.dJ[1];
    return {fpp / 2 * vx * vx * Jy + fp * vx * Jvx,
            -(fp * fp + f * fpp) / 2 * vx * vx * Jy - f * fp * vx * Jvx - fpp * vx * vy * Jy -
                fp * (vy * Jvx + vx * Jvy)};
}

namespace {

using JacobiSolver = Dopri5<8>;

// Base geodesic in slots 0..3, (Jx, Jy, Jx', Jy') in 4..7.
void jacobi_rhs(const RibbonMetric& m, const JacobiSolver::State& s, JacobiSolver::State& ds) {
    geodesic_rhs(m, s.data(), ds.data());
    const auto a = jacobi_acceleration(m, state_of(s.data()), JacobiState{{s[4], s[5]}, {s[6], s[7]}});
    ds[4] = s[6];
    ds[5] = s[7];
    ds[6] = a[0];
    ds[7] = a[1];
}

JacobiSolver::State pack(const GeodesicState& s, const JacobiState& j) {
    return {s.x, s.y, s.vx, s.vy, j.J[0], j.J[1], j.dJ[0], j.dJ[1]};
}

double light_scale(const RibbonMetric& m, const GeodesicState& s0) {
    const double E = energy(m, s0);
    if (std::abs(E) <= 1e-12 * (1 + s0.vx * s0.vx + s0.vy * s0.vy))
        throw LightlikeGeodesic("geodesic is lightlike (E = " + std::to_string(E) + ")");
    return std::sqrt(std::abs(E));
}

}  // namespace

JacobiRun integrate_jacobi(const RibbonMetric& m, const GeodesicState& s0, const JacobiState& j0, double t_end,
                           double tol) {
    check_tol(tol);
    const double scale = light_scale(m, s0);
    JacobiRun run;
    const auto sample = [&](double t, const JacobiSolver::State& s) {
        const GeodesicState b = state_of(s.data());
        JacobiState j;
        j.J = {s[4], s[5]};
        j.dJ = {s[6], s[7]};
        run.samples.push_back({t, b, j, normal_component(b, s[4], s[5], scale)});
    };
    const auto y0 = pack(s0, j0);
    sample(0.0, y0);
    const auto rhs = [&m](double, const JacobiSolver::State& s, JacobiSolver::State& ds) { jacobi_rhs(m, s, ds); };
    OdeOptions o;
    o.rtol = o.atol = tol;
    const auto res = JacobiSolver::integrate(rhs, 0.0, y0, t_end, o, [&](const JacobiSolver::Step& st) {
        sample(st.t1, st.y1);
        return true;
    });
    run.status = from_ode(res.status);
    return run;
}

void JacobiRun::write_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "t,J_x,J_y,normal_component\n";
    for (const auto& p : samples) os << p.t << ',' << p.jac.J[0] << ',' << p.jac.J[1] << ',' << p.normal << '\n';
    os.precision(old);
}

std::optional<double> first_conjugate_point(const RibbonMetric& m, const GeodesicState& s0, double t_max,
                                            double tol) {
    check_tol(tol);
    if (!(t_max > 0)) throw InvalidArgument("t_max must be positive");
    const double scale = light_scale(m, s0);
    const auto n = unit_normal(m, s0);
    const auto q_at = [&](const JacobiSolver::State& s) { return normal_component(state_of(s.data()), s[4], s[5], scale); };

    constexpr double t_start = 1e-6, t_res = 1e-8;
    constexpr int probes = 4;
    bool have_ref = false;
    double ref = 0, prev_t = 0;
    std::optional<double> found;
    const auto observer = [&](const JacobiSolver::Step& st) {
        for (int k = 1; k <= probes; ++k) {
            const double t = st.t0 + (st.t1 - st.t0) * k / probes;
            if (t < t_start) continue;
            const double q = q_at(k == probes ? st.y1 : st.at(t));
            if (!have_ref) {
                if (q == 0.0) continue;
                have_ref = true;
                ref = q > 0 ? 1 : -1;
                prev_t = t;
                continue;
            }
            if (q * ref > 0) {
                prev_t = t;
                continue;
            }
            if (q == 0.0) {
                found = t;
                return false;
            }
            double a = std::max(prev_t, st.t0), b = t;
            while (b - a > t_res) {
                const double c = 0.5 * (a + b);
                if (q_at(st.at(c)) * ref > 0) a = c;
                else b = c;
            }
            found = 0.5 * (a + b);
            return false;
        }
        return true;
    };
    const auto rhs = [&m](double, const JacobiSolver::State& s, JacobiSolver::State& ds) { jacobi_rhs(m, s, ds); };
    OdeOptions o;
    o.rtol = o.atol = tol;
    JacobiState j0;
    j0.dJ = n;
    JacobiSolver::integrate(rhs, 0.0, pack(s0, j0), t_max, o, observer);
    return found;
}

LightlikeReport lightlike_incompleteness(const RibbonMetric& m, double z, double vx0) {
    const double fz = m.f(z), fp = m.d1(z);
    if (!(std::abs(fz) <= 1e-9 * (1 + std::abs(fp)))) throw NotAZero("f(z) != 0 at z = " + std::to_string(z));
    if (vx0 == 0.0 || !std::isfinite(vx0)) throw InvalidArgument("x'(0) must be finite and non-zero");
    LightlikeReport r;
    r.z = z;
    r.multiplier = fp;
    r.vx0 = vx0;
    const double k = fp * vx0;
    r.incomplete = k > 0;
    r.backward_incomplete = k < 0;
    if (k != 0.0) r.horizon = 2 / k;
    return r;
}

}  // namespace kconf
