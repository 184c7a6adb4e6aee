#pragma once

// Dormand-Prince 5(4) with PI step control and 4th-order dense output
// (Hairer/Norsett/Wanner, "Solving ODEs I", DOPRI5 coefficients).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "kconf/errors.hpp"

namespace kconf {

enum class OdeStatus {
    Completed,
    StepUnderflow,  // |h| fell below 16 eps |t|: finite-time blow-up or a stiff wall
    MaxSteps,
    NonFinite,      // the right-hand side kept producing non-finite values
    Stopped,        // the observer asked to stop
};

const char* to_string(OdeStatus s);

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_initial = 0.0;  // 0 = automatic
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 2'000'000;
};

template <std::size_t N>
class Dopri5 {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    // One accepted step, with continuous output on [t0, t1].
    struct Step {
        double t0 = 0, t1 = 0;
        State y0{}, y1{};
        std::array<State, 5> r{};

        State at(double t) const {
            const double h = t1 - t0;
            const double s = h == 0.0 ? 0.0 : (t - t0) / h;
            const double s1 = 1.0 - s;
            State out;
            for (std::size_t i = 0; i < N; ++i)
                out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
            return out;
        }
    };

    // Return false to stop integration after this step.
    using Observer = std::function<bool(const Step&)>;

    struct Result {
        OdeStatus status = OdeStatus::Completed;
        double t = 0;
        State y{};
        long steps = 0;
        long rejected = 0;
    };

    static Result integrate(const Rhs& rhs, double t0, const State& y0, double t_end, const OdeOptions& opt,
                            const Observer& observer = {}) {
        Result res;
        res.t = t0;
        res.y = y0;
        if (t0 == t_end) return res;
        const double dir = t_end > t0 ? 1.0 : -1.0;

        State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
        if (!eval(rhs, t0, y0, k1)) {
            res.status = OdeStatus::NonFinite;
            return res;
        }
        double t = t0;
        State y = y0;
        double h = opt.h_initial > 0 ? opt.h_initial : initial_step(rhs, t, y, k1, dir, opt);
        h = dir * std::min(std::abs(h), std::min(opt.h_max, std::abs(t_end - t0)));
        double facold = 1e-4;
        bool last_rejected = false;
        int nonfinite_streak = 0;

        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                         a65 = -5103.0 / 18656;
        constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                         a76 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                         e6 = 22.0 / 525, e7 = -1.0 / 40;
        constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                         d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                         d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
        constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9;
        constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
        constexpr double eps = std::numeric_limits<double>::epsilon();

        while (true) {
            if (res.steps + res.rejected >= opt.max_steps) {
                res.status = OdeStatus::MaxSteps;
                break;
            }
            if (std::abs(h) <= 16.0 * eps * std::max(std::abs(t), 1e-300)) {
                res.status = OdeStatus::StepUnderflow;
                break;
            }
            bool final_step = false;
            if (dir * (t + h - t_end) >= 0.0) {
                h = t_end - t;
                final_step = true;
            }

            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
            bool ok = eval(rhs, t + c2 * h, ytmp, k2);
            for (std::size_t i = 0; ok && i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            ok = ok && eval(rhs, t + c3 * h, ytmp, k3);
            for (std::size_t i = 0; ok && i < N; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            ok = ok && eval(rhs, t + c4 * h, ytmp, k4);
            for (std::size_t i = 0; ok && i < N; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            ok = ok && eval(rhs, t + c5 * h, ytmp, k5);
            for (std::size_t i = 0; ok && i < N; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            ok = ok && eval(rhs, t + h, ytmp, k6);
            for (std::size_t i = 0; ok && i < N; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            ok = ok && eval(rhs, t + h, ynew, k7);

            if (!ok) {
                // Shrink hard and retry; repeated failures at tiny steps mean a genuine wall.
                ++res.rejected;
                if (++nonfinite_streak > 60) {
                    res.status = OdeStatus::NonFinite;
                    break;
                }
                h *= 0.25;
                last_rejected = true;
                continue;
            }
            nonfinite_streak = 0;

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double sk = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                err += (ei / sk) * (ei / sk);
            }
            err = std::sqrt(err / static_cast<double>(N));
            if (!std::isfinite(err)) err = 1e10;

            const double fac11 = std::pow(err, expo1);
            if (err <= 1.0) {
                double fac = fac11 / std::pow(facold, beta);
                fac = std::max(facc2, std::min(facc1, fac / safe));
                facold = std::max(err, 1e-4);

                Step step;
                step.t0 = t;
                step.t1 = t + h;
                step.y0 = y;
                step.y1 = ynew;
                for (std::size_t i = 0; i < N; ++i) {
                    const double ydiff = ynew[i] - y[i];
                    const double bspl = h * k1[i] - ydiff;
                    step.r[0][i] = y[i];
                    step.r[1][i] = ydiff;
                    step.r[2][i] = bspl;
                    step.r[3][i] = ydiff - h * k7[i] - bspl;
                    step.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                k1 = k7;
                y = ynew;
                t = final_step ? t_end : t + h;
                ++res.steps;
                res.t = t;
                res.y = y;
                if (observer && !observer(step)) {
                    res.status = OdeStatus::Stopped;
                    break;
                }
                if (final_step) break;
                double hnew = h / fac;
                if (std::abs(hnew) > opt.h_max) hnew = dir * opt.h_max;
                if (last_rejected) hnew = dir * std::min(std::abs(hnew), std::abs(h));
                last_rejected = false;
                h = hnew;
            } else {
                ++res.rejected;
                h /= std::min(facc1, fac11 / safe);
                last_rejected = true;
            }
        }
        return res;
    }

private:
    static bool eval(const Rhs& rhs, double t, const State& y, State& dy) {
        try {
            rhs(t, y, dy);
        } catch (const DomainError&) {
            return false;
        }
        for (double v : dy)
            if (!std::isfinite(v)) return false;
        return true;
    }

    // Hairer's HINIT heuristic.
    static double initial_step(const Rhs& rhs, double t, const State& y, const State& f0, double dir,
                               const OdeOptions& opt) {
        double dnf = 0, dny = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = opt.atol + opt.rtol * std::abs(y[i]);
            dnf += (f0[i] / sk) * (f0[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, opt.h_max);
        State y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h * f0[i];
        if (!eval(rhs, t + dir * h, y1, f1)) return h * 1e-3;
        double der2 = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = opt.atol + opt.rtol * std::abs(y[i]);
            der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
        return std::min({100 * std::abs(h), h1, opt.h_max});
    }
};

inline const char* to_string(OdeStatus s) {
    switch (s) {
        case OdeStatus::Completed: return "completed";
        case OdeStatus::StepUnderflow: return "step_underflow";
        case OdeStatus::MaxSteps: return "max_steps";
        case OdeStatus::NonFinite: return "non_finite";
        case OdeStatus::Stopped: return "stopped";
    }
    return "?";
}

}  // namespace kconf
