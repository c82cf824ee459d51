#pragma once

// Time-domain integration of the five modified Maxwell-Bloch equations.
//
// The integrated vector is (n, x, rho11, rho00); rho22 is reconstructed as
// 1 - rho11 - rho00, so the trace is conserved up to rounding. Times taken
// and returned by this module are in units of 1/gamma_10.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "mblaser/errors.hpp"
#include "mblaser/format.hpp"
#include "mblaser/model.hpp"

namespace mblaser {

struct StateDerivative {
    double photons = 0.0;
    double polarization = 0.0;
    double pop1 = 0.0;
    double pop0 = 0.0;
};

/// Right-hand side in the time unit of `p`. Defined for any state.
inline StateDerivative rhs(const LaserState& s, const PhysicalParams& p)
{
    const double rho22 = 1.0 - s.pop0 - s.pop1;
    const double gx = p.coupling * s.polarization;
    StateDerivative d;
    d.photons = -2.0 * p.cavity_decay * s.photons + p.n_atoms * gx;
    d.polarization = -gamma_perp(p) * s.polarization
                     + 2.0 * p.coupling * ((s.photons + 1.0) * s.pop1 - s.photons * s.pop0);
    d.pop1 = -p.gamma_10 * s.pop1 + p.gamma_21 * rho22 - gx;
    d.pop0 = -p.gamma_02 * s.pop0 + p.gamma_10 * s.pop1 + gx;
    return d;
}

struct IntegratorSettings {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double t_end = 1e4;
    double convergence_window = 50.0;
    double convergence_eps = 1e-9;

    void validate() const
    {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) {
            throw invalid_parameter("rel_tol must lie in (0, 1e-3]");
        }
        if (!(abs_tol > 0.0)) {
            throw invalid_parameter("abs_tol must be > 0");
        }
        if (!(t_end > 0.0) || !std::isfinite(t_end)) {
            throw invalid_parameter("t_end must be finite and > 0");
        }
        if (!(max_step > 0.0)) {
            throw invalid_parameter("max_step must be > 0");
        }
        if (!(convergence_window > 0.0) || !(convergence_eps > 0.0)) {
            throw invalid_parameter("convergence_window and convergence_eps must be > 0");
        }
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<LaserState> states;
    double max_trace_drift = 0.0; // max |rho00 + rho11 + rho22 - 1| over accepted steps
    double min_photons = 0.0;     // min n over accepted steps
    std::optional<double> converged_at;
    long steps = 0; // accepted steps
};

namespace detail {

using Vec4 = std::array<double, 4>;

inline Vec4 pack(const LaserState& s) { return {s.photons, s.polarization, s.pop1, s.pop0}; }

inline LaserState unpack(const Vec4& y)
{
    return LaserState{
        .photons = y[0],
        .polarization = y[1],
        .pop0 = y[3],
        .pop1 = y[2],
        .pop2 = 1.0 - y[2] - y[3],
    };
}

// Rates divided by gamma_10.
struct ScaledSystem {
    double two_kappa, n_g, gp, two_g, g, g21, g02;

    explicit ScaledSystem(const PhysicalParams& p)
    {
        const double u = p.gamma_10;
        two_kappa = 2.0 * p.cavity_decay / u;
        n_g = p.n_atoms * p.coupling / u;
        gp = gamma_perp(p) / u;
        g = p.coupling / u;
        two_g = 2.0 * g;
        g21 = p.gamma_21 / u;
        g02 = p.gamma_02 / u;
    }

    void operator()(const Vec4& y, Vec4& dy, double) const
    {
        const double n = y[0], x = y[1], r11 = y[2], r00 = y[3];
        const double r22 = 1.0 - r11 - r00;
        const double gx = g * x;
        dy[0] = -two_kappa * n + n_g * x;
        dy[1] = -gp * x + two_g * ((n + 1.0) * r11 - n * r00);
        dy[2] = -r11 + g21 * r22 - gx;
        dy[3] = -g02 * r00 + r11 + gx;
    }
};

inline void check_initial(const LaserState& s)
{
    auto in_unit = [](double v) { return std::isfinite(v) && v >= -1e-12 && v <= 1.0 + 1e-12; };
    if (!std::isfinite(s.photons) || s.photons < 0.0 || !std::isfinite(s.polarization)) {
        throw invalid_parameter("initial state: photons must be finite and >= 0, polarization finite");
    }
    if (!in_unit(s.pop0) || !in_unit(s.pop1) || !in_unit(s.pop2) || std::abs(s.trace() - 1.0) > 1e-12) {
        throw invalid_parameter("initial state: populations must lie in [0, 1] and sum to 1");
    }
}

// max-norm change between two packed states: relative in n, relative above
// 1 in x (which grows like sqrt(n)), absolute in the populations
inline double state_change(const Vec4& a, const Vec4& b, double floor)
{
    const double dn = std::abs(a[0] - b[0]) / std::max({std::abs(a[0]), std::abs(b[0]), floor});
    const double dx = std::abs(a[1] - b[1]) / std::max({std::abs(a[1]), std::abs(b[1]), 1.0});
    return std::max({dn, dx, std::abs(a[2] - b[2]), std::abs(a[3] - b[3])});
}

// Shared driver. Samples go to `out` (every accepted step when `samples` is
// empty, else the requested times through the dense interpolant).
inline Vec4 drive(const LaserState& init, const PhysicalParams& p, const IntegratorSettings& cfg,
                  std::span<const double> samples, bool stop_on_convergence, Trajectory& out)
{
    p.validate();
    cfg.validate();
    check_initial(init);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] < 0.0 || samples[i] > cfg.t_end || (i > 0 && !(samples[i] > samples[i - 1]))) {
            throw invalid_parameter("sample times must be strictly increasing within [0, t_end]");
        }
    }

    namespace odeint = boost::numeric::odeint;
    using dopri5 = odeint::runge_kutta_dopri5<Vec4>;
    const ScaledSystem sys(p);
    // max_dt = 0 means unbounded to odeint
    const double max_dt = std::isfinite(cfg.max_step) ? cfg.max_step : 0.0;
    auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, max_dt, dopri5());

    double t = 0.0;
    Vec4 y = pack(init);
    // the controller grows the step by at most 5x per step, so a small
    // first step costs a handful of evaluations
    stepper.initialize(y, t, std::min({1e-6, cfg.t_end, cfg.max_step}));

    auto record = [&](double time, const Vec4& v) {
        out.times.push_back(time);
        out.states.push_back(unpack(v));
    };
    auto track = [&](const Vec4& v) {
        const LaserState s = unpack(v);
        out.max_trace_drift = std::max(out.max_trace_drift, std::abs(s.trace() - 1.0));
        out.min_photons = std::min(out.min_photons, s.photons);
    };

    out.min_photons = y[0];
    track(y);
    std::size_t next_sample = 0;
    if (samples.empty()) {
        record(t, y);
    } else {
        while (next_sample < samples.size() && samples[next_sample] <= t) {
            record(samples[next_sample++], y);
        }
    }

    double t_ref = t;
    Vec4 y_ref = y;
    while (t < cfg.t_end) {
        double t1 = 0.0;
        try {
            t1 = stepper.do_step(sys).second;
        } catch (const odeint::odeint_error& e) {
            throw step_size_underflow("step size control failed at t = " + format_double(stepper.current_time())
                                      + ": " + e.what());
        }
        ++out.steps;
        Vec4 y1 = stepper.current_state();
        if (t1 >= cfg.t_end) {
            // the dense stepper may run past t_end; stop exactly there
            t1 = cfg.t_end;
            stepper.calc_state(t1, y1);
        }
        for (double v : y1) {
            if (!std::isfinite(v)) {
                throw non_finite("state left the finite range at t = " + format_double(t1));
            }
        }
        t = t1;
        y = y1;
        track(y);
        if (samples.empty()) {
            record(t, y);
        } else {
            while (next_sample < samples.size() && samples[next_sample] <= t) {
                const double ts = samples[next_sample++];
                Vec4 v = y;
                if (ts != t) {
                    stepper.calc_state(ts, v);
                }
                record(ts, v);
            }
        }
        if (t - t_ref >= cfg.convergence_window) {
            if (state_change(y, y_ref, cfg.abs_tol) < cfg.convergence_eps) {
                if (!out.converged_at) {
                    out.converged_at = t;
                }
                if (stop_on_convergence) {
                    break;
                }
            }
            t_ref = t;
            y_ref = y;
        }
    }
    return y;
}

} // namespace detail

/// Adaptive integration from t = 0 to cfg.t_end. With `sample_times` the
/// trajectory holds exactly those times (dense output); otherwise every
/// accepted step. `converged_at` reports the first trailing-window
/// convergence, if any; integration continues to t_end regardless.
inline Trajectory integrate(const LaserState& init, const PhysicalParams& p, const IntegratorSettings& cfg,
                            std::span<const double> sample_times = {})
{
    Trajectory traj;
    detail::drive(init, p, cfg, sample_times, false, traj);
    return traj;
}

/// Integrates until the state changes by less than convergence_eps over a
/// trailing convergence_window.
inline LaserState relax_to_steady(const LaserState& init, const PhysicalParams& p, const IntegratorSettings& cfg)
{
    Trajectory stats;
    // a single sample at t = 0 keeps the driver from storing every step
    const double zero = 0.0;
    const auto y = detail::drive(init, p, cfg, std::span<const double>(&zero, 1), true, stats);
    if (!stats.converged_at) {
        throw no_convergence("no steady state within t_end = " + format_double(cfg.t_end)
                             + " (state still changing by more than " + format_double(cfg.convergence_eps) + " per window)");
    }
    return detail::unpack(y);
}

} // namespace mblaser
