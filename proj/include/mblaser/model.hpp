#pragma once

// Domain types and closed-form steady state of the closed three-level laser.
//
// Time is measured in units of 1/gamma_10 throughout; every rate inside a
// DimensionlessParams is a ratio to gamma_10.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "mblaser/errors.hpp"

namespace mblaser {

enum class Scheme { lambda, v };

inline std::string_view to_string(Scheme s) { return s == Scheme::lambda ? "lambda" : "v"; }

inline Scheme parse_scheme(std::string_view text)
{
    if (text == "lambda" || text == "Lambda" || text == "LAMBDA") {
        return Scheme::lambda;
    }
    if (text == "v" || text == "V") {
        return Scheme::v;
    }
    throw invalid_parameter("unknown scheme '" + std::string(text) + "' (expected lambda or v)");
}

/// Raw rates and atom count of one laser. All rates share one time unit.
struct PhysicalParams {
    double n_atoms = 1.0;
    double coupling = 1.0;     // g
    double cavity_decay = 1.0; // kappa
    double gamma_10 = 1.0;
    double gamma_21 = 0.0;
    double gamma_02 = 0.0;
    double gamma_col = 0.0;

    void validate() const
    {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!(finite(n_atoms) && n_atoms >= 1.0)) {
            throw invalid_parameter("n_atoms must be >= 1");
        }
        if (!(finite(coupling) && coupling > 0.0)) {
            throw invalid_parameter("coupling must be > 0");
        }
        if (!(finite(cavity_decay) && cavity_decay > 0.0)) {
            throw invalid_parameter("cavity_decay must be > 0");
        }
        if (!(finite(gamma_10) && gamma_10 > 0.0)) {
            throw invalid_parameter("gamma_10 must be > 0");
        }
        if (!(finite(gamma_21) && gamma_21 >= 0.0) || !(finite(gamma_02) && gamma_02 >= 0.0)
            || !(finite(gamma_col) && gamma_col >= 0.0)) {
            throw invalid_parameter("gamma_21, gamma_02, gamma_col must be >= 0");
        }
    }

    bool operator==(const PhysicalParams&) const = default;
};

/// (lambda, S, alpha1, alpha2, eta): the canonical parameterization.
struct DimensionlessParams {
    double lam = 0.0;    // N gamma_10 / (2 kappa)
    double sat = 0.0;    // gamma_10^2 / (4 g^2)
    double alpha1 = 0.0; // gamma_21 / gamma_10
    double alpha2 = 0.0; // gamma_02 / gamma_10
    double eta = 0.0;    // gamma_col / gamma_10

    void validate() const
    {
        auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
        if (!ok(lam)) {
            throw invalid_parameter("lam must be finite and >= 0");
        }
        if (!ok(sat)) {
            throw invalid_parameter("sat must be finite and >= 0");
        }
        if (!ok(alpha1) || !ok(alpha2)) {
            throw invalid_parameter("alpha1 and alpha2 must be finite and >= 0");
        }
        if (!ok(eta)) {
            throw invalid_parameter("eta must be finite and >= 0");
        }
    }

    /// P1 = alpha1 for the Lambda scheme, P2 = alpha2 for V.
    double pump(Scheme s) const { return s == Scheme::lambda ? alpha1 : alpha2; }

    DimensionlessParams with_pump(Scheme s, double value) const
    {
        DimensionlessParams out = *this;
        (s == Scheme::lambda ? out.alpha1 : out.alpha2) = value;
        return out;
    }

    bool operator==(const DimensionlessParams&) const = default;
};

/// Dynamical variables. pop0/pop1/pop2 are rho00/rho11/rho22.
struct LaserState {
    double photons = 0.0;
    double polarization = 0.0; // x = z* rho10 + c.c.
    double pop0 = 0.0;
    double pop1 = 0.0;
    double pop2 = 0.0;

    double inversion() const { return pop1 - pop0; }
    double trace() const { return pop0 + pop1 + pop2; }

    bool operator==(const LaserState&) const = default;
};

/// Initial state of the turn-on scenario: all atoms in the level the pump
/// acts on, empty cavity.
inline LaserState ground_state(Scheme s)
{
    LaserState st;
    (s == Scheme::lambda ? st.pop2 : st.pop0) = 1.0;
    return st;
}

inline DimensionlessParams nondimensionalize(const PhysicalParams& p)
{
    if (!(p.gamma_10 > 0.0)) {
        throw invalid_parameter("gamma_10 must be > 0");
    }
    if (!(p.coupling > 0.0)) {
        throw invalid_parameter("coupling must be > 0");
    }
    p.validate();
    const double g10 = p.gamma_10;
    return DimensionlessParams{
        .lam = p.n_atoms * g10 / (2.0 * p.cavity_decay),
        .sat = g10 * g10 / (4.0 * p.coupling * p.coupling),
        .alpha1 = p.gamma_21 / g10,
        .alpha2 = p.gamma_02 / g10,
        .eta = p.gamma_col / g10,
    };
}

/// Inverse of nondimensionalize for a chosen (gamma_10, kappa).
/// S = 0 has no physical image (infinite coupling) and is rejected.
inline PhysicalParams realize(const DimensionlessParams& d, double gamma_10 = 1.0, double cavity_decay = 1.0)
{
    d.validate();
    if (!(d.sat > 0.0)) {
        throw invalid_parameter("sat = 0 corresponds to infinite coupling; no physical realization");
    }
    if (!(gamma_10 > 0.0) || !(cavity_decay > 0.0)) {
        throw invalid_parameter("gamma_10 and cavity_decay must be > 0");
    }
    PhysicalParams p{
        .n_atoms = 2.0 * cavity_decay * d.lam / gamma_10,
        .coupling = gamma_10 / (2.0 * std::sqrt(d.sat)),
        .cavity_decay = cavity_decay,
        .gamma_10 = gamma_10,
        .gamma_21 = d.alpha1 * gamma_10,
        .gamma_02 = d.alpha2 * gamma_10,
        .gamma_col = d.eta * gamma_10,
    };
    p.validate();
    return p;
}

/// Transversal (coherence) relaxation rate.
inline double gamma_perp(const PhysicalParams& p) { return 0.5 * (p.gamma_10 + p.gamma_02 + p.gamma_col); }

/// Same rate in gamma_10 units; for the V scheme this carries the pump.
inline double gamma_perp(const DimensionlessParams& d) { return 0.5 * (1.0 + d.alpha2 + d.eta); }

/// n solves n^2 - b n - c = 0; see photon_steady.
struct QuadraticCoefficients {
    double b = 0.0;
    double c = 0.0;
};

namespace detail {

inline double pumping_denominator(const DimensionlessParams& d)
{
    const double den = d.alpha2 + 2.0 * d.alpha1;
    if (!(den > 0.0)) {
        throw invalid_parameter("alpha1 = alpha2 = 0: no pumping path exists");
    }
    return den;
}

// S (alpha2 + 1 + eta)(alpha1 alpha2 + alpha2 + alpha1): coherence loss term.
inline double dephasing_term(const DimensionlessParams& d)
{
    return d.sat * (d.alpha2 + 1.0 + d.eta) * (d.alpha1 * d.alpha2 + d.alpha2 + d.alpha1);
}

} // namespace detail

/// Coefficients of the steady-state photon quadratic obtained by eliminating
/// x and the populations from the five rate equations (n+1 factor included).
inline QuadraticCoefficients bc_coefficients(const DimensionlessParams& d)
{
    d.validate();
    const double den = detail::pumping_denominator(d);
    const double gain = d.lam * d.alpha1 * (d.alpha2 - 1.0);
    const double b = (gain - detail::dephasing_term(d) - d.alpha1 - d.alpha2) / den;
    const double c = d.lam * d.alpha1 * d.alpha2 / den;
    return {b, c};
}

/// b with the spontaneous-emission contribution removed (n+1 -> n). Its sign
/// is the standard Maxwell-Bloch lasing condition, and for b > 0 it is the
/// standard photon number.
inline double stimulated_b(const DimensionlessParams& d)
{
    d.validate();
    const double den = detail::pumping_denominator(d);
    return (d.lam * d.alpha1 * (d.alpha2 - 1.0) - detail::dephasing_term(d)) / den;
}

/// Nonnegative root of n^2 - b n - c = 0 for c >= 0, evaluated without
/// cancellation on either sign of b.
inline double positive_root(double b, double c)
{
    const double disc = std::sqrt(std::fma(b, b, 4.0 * c));
    if (b >= 0.0) {
        return 0.5 * (b + disc);
    }
    if (c == 0.0) {
        return 0.0;
    }
    return 2.0 * c / (disc - b);
}

/// Steady-state photon number.
inline double photon_steady(const DimensionlessParams& d)
{
    const auto [b, c] = bc_coefficients(d);
    return positive_root(b, c);
}

/// Residuals of the four rate equations, each divided by the magnitude of
/// its largest term (floored at 1). Written in the variable y = g x / gamma_10,
/// so every entry stays finite as S -> 0.
inline std::array<double, 4> steady_residuals(const LaserState& s, const DimensionlessParams& d)
{
    const double n = s.photons;
    double y = 0.0;
    if (d.sat > 0.0) {
        y = s.polarization / (2.0 * std::sqrt(d.sat));
    } else if (d.lam > 0.0) {
        y = n / d.lam; // g -> infinity: x -> 0 and only g x survives
    }
    auto scaled = [](double sum, std::initializer_list<double> terms) {
        double scale = 1.0;
        for (double t : terms) {
            scale = std::max(scale, std::abs(t));
        }
        return sum / scale;
    };
    const double gp = gamma_perp(d);
    const double stim1 = (n + 1.0) * s.pop1;
    const double stim0 = n * s.pop0;
    const double loss = 2.0 * d.sat * gp * y;
    const double r1 = scaled(d.sat > 0.0 ? d.lam * y - n : 2.0 * std::sqrt(d.sat) * n - s.polarization,
                             {n, d.lam * y});
    const double r2 = scaled(stim1 - stim0 - loss, {stim1, stim0, loss});
    const double r3 = scaled(-s.pop1 + d.alpha1 * s.pop2 - y, {s.pop1, d.alpha1 * s.pop2, y});
    const double r4 = scaled(-d.alpha2 * s.pop0 + s.pop1 + y, {d.alpha2 * s.pop0, s.pop1, y});
    return {r1, r2, r3, r4};
}

struct SteadyState {
    LaserState state;
    bool physical = false;
    double residual = 0.0; // max-norm of steady_residuals
};

inline constexpr double population_slack = 1e-12;
inline constexpr double residual_tolerance = 1e-9;

/// Back-substitutes a photon number into the stationary equations and flags
/// the result. Any n is accepted; a root that forces a population outside
/// [0, 1] comes back with physical = false (a spurious branch).
inline SteadyState steady_state_at(double photons, const DimensionlessParams& d)
{
    d.validate();
    const double q = d.alpha2 + d.alpha1 * d.alpha2 + d.alpha1;
    if (!(q > 0.0)) {
        throw invalid_parameter("alpha1 = alpha2 = 0: no pumping path exists");
    }
    // m = g x / gamma_10 at steady state
    const double m = photons == 0.0 ? 0.0 : photons / d.lam;

    SteadyState out;
    LaserState& s = out.state;
    s.photons = photons;
    s.polarization = 2.0 * std::sqrt(d.sat) * m;
    s.pop1 = (d.alpha1 * d.alpha2 - m * (d.alpha1 + d.alpha2)) / q;
    s.pop0 = d.alpha1 * (1.0 + m) / q;
    s.pop2 = d.alpha2 * (1.0 + m) / q;

    const auto res = steady_residuals(s, d);
    out.residual = 0.0;
    for (double r : res) {
        out.residual = std::max(out.residual, std::abs(r));
    }

    auto in_range = [](double v) {
        return std::isfinite(v) && v >= -population_slack && v <= 1.0 + population_slack;
    };
    out.physical = std::isfinite(photons) && photons >= 0.0 && in_range(s.pop0) && in_range(s.pop1)
                   && in_range(s.pop2) && out.residual < residual_tolerance;
    if (out.physical) {
        s.pop0 = std::clamp(s.pop0, 0.0, 1.0);
        s.pop1 = std::clamp(s.pop1, 0.0, 1.0);
        s.pop2 = std::clamp(s.pop2, 0.0, 1.0);
    }
    return out;
}

/// Full stationary state at the closed-form photon number.
inline SteadyState steady_state_full(const DimensionlessParams& d) { return steady_state_at(photon_steady(d), d); }

inline SteadyState steady_state_full(const PhysicalParams& p) { return steady_state_full(nondimensionalize(p)); }

} // namespace mblaser
