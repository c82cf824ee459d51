#pragma once

// Thresholds, critical points, beta factor, saturation photon number, regime
// classification and single-parameter sweeps.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mblaser/errors.hpp"
#include "mblaser/format.hpp"
#include "mblaser/model.hpp"

namespace mblaser {

enum class Regime { below_threshold, lasing, above_breakdown, no_lasing };

inline std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::below_threshold:
        return "below_threshold";
    case Regime::lasing:
        return "lasing";
    case Regime::above_breakdown:
        return "above_breakdown";
    case Regime::no_lasing:
        return "no_lasing";
    }
    return "unknown";
}

enum class ThresholdMethod { closed_form, exact_root, expansion };

inline std::string_view to_string(ThresholdMethod m)
{
    switch (m) {
    case ThresholdMethod::closed_form:
        return "closed_form";
    case ThresholdMethod::exact_root:
        return "exact_root";
    case ThresholdMethod::expansion:
        return "expansion";
    }
    return "unknown";
}

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Lambda scheme

/// Largest saturation parameter that still admits lasing. Zero when
/// alpha2 <= 1 or lam = 0.
inline double s_max_lambda(const DimensionlessParams& d)
{
    d.validate();
    if (!(d.alpha2 > 1.0) || d.lam == 0.0) {
        return 0.0;
    }
    return d.lam * (d.alpha2 - 1.0) / ((d.alpha2 + 1.0) * (d.alpha2 + 1.0 + d.eta));
}

/// Pump P1 = alpha1 above which the standard Maxwell-Bloch steady state has
/// n > 0. alpha1 of `d` is ignored.
inline double lambda_threshold(const DimensionlessParams& d)
{
    d.validate();
    const double loss = d.alpha2 + 1.0 + d.eta;
    const double den = d.lam * (d.alpha2 - 1.0) - d.sat * (d.alpha2 + 1.0) * loss;
    if (!(den > 0.0)) {
        throw no_lasing("no lasing for any pump: S = " + format_double(d.sat)
                        + " is not below S_max = " + format_double(s_max_lambda(d)));
    }
    return d.alpha2 * d.sat * loss / den;
}

/// Limit of the photon number as P1 -> infinity.
inline double n_saturation(const DimensionlessParams& d)
{
    d.validate();
    // alpha1 -> infinity in bc_coefficients: both numerators are linear in
    // alpha1 and the denominator tends to 2 alpha1
    const double b_inf = 0.5 * (d.lam * (d.alpha2 - 1.0) - d.sat * (d.alpha2 + 1.0 + d.eta) * (d.alpha2 + 1.0) - 1.0);
    const double c_inf = 0.5 * d.lam * d.alpha2;
    return positive_root(b_inf, c_inf);
}

// ---------------------------------------------------------------------------
// Spontaneous emission factor

inline double beta_factor(const DimensionlessParams& d)
{
    d.validate();
    return 1.0 / (1.0 + d.sat * (1.0 + d.alpha2 + d.eta));
}

/// beta at S = S_max; below it the Lambda laser cannot operate. Returns 1
/// when alpha2 <= 1 (no beta admits lasing).
inline double beta_min(const DimensionlessParams& d)
{
    d.validate();
    if (!(d.alpha2 > 1.0)) {
        return 1.0;
    }
    return 1.0 / (1.0 + d.lam * (d.alpha2 - 1.0) / (d.alpha2 + 1.0));
}

// ---------------------------------------------------------------------------
// V scheme

struct PumpWindow {
    double p_thr = 0.0;
    double p_max = infinity;
};

/// First-order expansion in S / lam of the V-scheme critical points.
inline PumpWindow v_thresholds_approx(const DimensionlessParams& d)
{
    d.validate();
    if (!(d.alpha1 > 0.0)) {
        throw invalid_parameter("alpha1 must be > 0 for the V scheme (no |2> -> |1> depletion path)");
    }
    if (!(d.lam > 0.0)) {
        throw invalid_parameter("lam must be > 0 for the V-scheme expansion");
    }
    PumpWindow w;
    w.p_thr = 1.0 + d.sat / d.lam * (1.0 + 2.0 * d.alpha1) * (2.0 + d.eta) / d.alpha1;
    w.p_max = d.sat > 0.0 ? d.lam / d.sat * d.alpha1 / (1.0 + d.alpha1) : infinity;
    return w;
}

namespace detail {

// Numerator of stimulated_b as a function of P2 = alpha2:
//   lam a1 (P - 1) - S (P + 1 + eta)(P (1 + a1) + a1)
inline double v_gain_numerator(const DimensionlessParams& d, double p2)
{
    return d.lam * d.alpha1 * (p2 - 1.0) - d.sat * (p2 + 1.0 + d.eta) * (p2 * (1.0 + d.alpha1) + d.alpha1);
}

template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol = 1e-12)
{
    double flo = f(lo);
    for (int i = 0; i < 400 && (hi - lo) > rel_tol * std::abs(0.5 * (lo + hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Roots in P2 of the standard Maxwell-Bloch lasing condition. The quadratic
/// is solved in closed form; each root is re-bracketed and bisected, and the
/// bisection value replaces the closed form if the two disagree by more than
/// 1e-9 relative.
inline PumpWindow v_thresholds_exact(const DimensionlessParams& d)
{
    d.validate();
    if (!(d.alpha1 > 0.0)) {
        throw invalid_parameter("alpha1 must be > 0 for the V scheme (no |2> -> |1> depletion path)");
    }
    const double a1 = d.alpha1;
    const double qa = d.sat * (1.0 + a1);
    const double qb = d.lam * a1 - d.sat * ((1.0 + d.eta) * (1.0 + a1) + a1);
    const double qc = d.lam * a1 + d.sat * a1 * (1.0 + d.eta);

    if (d.sat == 0.0) {
        if (!(d.lam > 0.0)) {
            throw empty_window("lam = 0: no gain for any pump");
        }
        return PumpWindow{1.0, infinity};
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (!(qb > 0.0) || !(disc > 0.0)) {
        throw empty_window("V-scheme lasing window is empty (S too large for lam)");
    }
    const double sq = std::sqrt(disc);
    PumpWindow w;
    w.p_max = (qb + sq) / (2.0 * qa);
    w.p_thr = 2.0 * qc / (qb + sq);

    auto f = [&](double p) { return detail::v_gain_numerator(d, p); };
    const double vertex = qb / (2.0 * qa);
    const double thr_b = detail::bisect(f, 0.0, vertex);
    double hi = 2.0 * vertex;
    while (f(hi) > 0.0) {
        hi *= 2.0;
    }
    const double max_b = detail::bisect(f, vertex, hi);
    if (std::abs(thr_b - w.p_thr) > 1e-9 * w.p_thr) {
        w.p_thr = thr_b;
    }
    if (std::abs(max_b - w.p_max) > 1e-9 * w.p_max) {
        w.p_max = max_b;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Reports and classification

struct ThresholdReport {
    Scheme scheme = Scheme::lambda;
    double p_thr = 0.0;
    std::optional<double> p_max; // V only
    std::optional<double> s_max; // Lambda only
    double beta = 1.0;
    double beta_min = 1.0;
    ThresholdMethod method = ThresholdMethod::closed_form;
};

/// Lambda: threshold pump, S_max, beta and beta_min. Throws no_lasing.
inline ThresholdReport lambda_report(const DimensionlessParams& d)
{
    ThresholdReport r;
    r.scheme = Scheme::lambda;
    r.s_max = s_max_lambda(d);
    r.beta = beta_factor(d);
    r.beta_min = mblaser::beta_min(d);
    r.p_thr = lambda_threshold(d);
    r.method = ThresholdMethod::closed_form;
    return r;
}

/// V: critical points by exact roots or by expansion. beta depends on the
/// pump here, so `beta` is its value at p_thr and `beta_min` at p_max.
inline ThresholdReport v_report(const DimensionlessParams& d, ThresholdMethod method)
{
    const PumpWindow w = method == ThresholdMethod::expansion ? v_thresholds_approx(d) : v_thresholds_exact(d);
    ThresholdReport r;
    r.scheme = Scheme::v;
    r.p_thr = w.p_thr;
    r.p_max = w.p_max;
    r.beta = beta_factor(d.with_pump(Scheme::v, w.p_thr));
    r.beta_min = std::isfinite(w.p_max) ? beta_factor(d.with_pump(Scheme::v, w.p_max)) : r.beta;
    r.method = method == ThresholdMethod::expansion ? ThresholdMethod::expansion : ThresholdMethod::exact_root;
    return r;
}

/// Pump values exactly at a threshold classify as lasing.
inline Regime classify_regime(const DimensionlessParams& d, Scheme scheme, double pump)
{
    if (scheme == Scheme::lambda) {
        if (d.sat >= s_max_lambda(d)) {
            return Regime::no_lasing;
        }
        return pump < lambda_threshold(d) ? Regime::below_threshold : Regime::lasing;
    }
    if (!(d.alpha1 > 0.0)) {
        return Regime::no_lasing;
    }
    PumpWindow w;
    try {
        w = v_thresholds_exact(d);
    } catch (const empty_window&) {
        return Regime::no_lasing;
    }
    if (pump < w.p_thr) {
        return Regime::below_threshold;
    }
    return pump > w.p_max ? Regime::above_breakdown : Regime::lasing;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class RowStatus { physical, spurious, failed };

struct SweepRow {
    double pump = 0.0;
    double photons = 0.0;
    double polarization = 0.0;
    double pop0 = 0.0;
    double pop1 = 0.0;
    double pop2 = 0.0;
    double inversion = 0.0;
    double beta = 0.0;
    double gamma_perp = 0.0; // gamma_10 units
    Regime regime = Regime::no_lasing;
    RowStatus status = RowStatus::physical;
    std::string error; // set when status == failed
};

struct SweepTable {
    Scheme scheme = Scheme::lambda;
    std::string swept_parameter;
    std::vector<SweepRow> rows;
};

inline std::string_view pump_name(Scheme s) { return s == Scheme::lambda ? "alpha1" : "alpha2"; }

inline SweepRow evaluate_row(const DimensionlessParams& base, Scheme scheme, double pump)
{
    SweepRow row;
    row.pump = pump;
    const DimensionlessParams d = base.with_pump(scheme, pump);
    try {
        const SteadyState ss = steady_state_full(d);
        row.photons = ss.state.photons;
        row.polarization = ss.state.polarization;
        row.pop0 = ss.state.pop0;
        row.pop1 = ss.state.pop1;
        row.pop2 = ss.state.pop2;
        row.inversion = ss.state.inversion();
        row.beta = beta_factor(d);
        row.gamma_perp = gamma_perp(d);
        row.regime = classify_regime(d, scheme, pump);
        row.status = ss.physical ? RowStatus::physical : RowStatus::spurious;
    } catch (const error& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.photons = row.polarization = row.pop0 = row.pop1 = row.pop2 = row.inversion = nan;
        row.beta = row.gamma_perp = nan;
        row.status = RowStatus::failed;
        row.error = e.what();
    }
    return row;
}

/// Closed-form rows along `grid`, which sets alpha1 (Lambda) or alpha2 (V).
/// Per-row model errors are recorded in the row and do not abort the sweep.
inline SweepTable sweep(const DimensionlessParams& base, Scheme scheme, std::span<const double> grid)
{
    base.validate();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw invalid_parameter("sweep grid must be positive, finite and strictly increasing");
        }
    }
    SweepTable table;
    table.scheme = scheme;
    table.swept_parameter = std::string(pump_name(scheme));
    table.rows.reserve(grid.size());
    for (double p : grid) {
        table.rows.push_back(evaluate_row(base, scheme, p));
    }
    return table;
}

inline std::vector<double> log_grid(double from, double to, std::size_t points)
{
    if (!(from > 0.0) || !(to > from) || points < 2) {
        throw invalid_parameter("log grid needs 0 < from < to and points >= 2");
    }
    std::vector<double> g(points);
    const double a = std::log10(from);
    const double step = (std::log10(to) - a) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = std::pow(10.0, a + step * static_cast<double>(i));
    }
    g.front() = from;
    g.back() = to;
    return g;
}

inline std::vector<double> linear_grid(double from, double to, std::size_t points)
{
    if (!(to > from) || points < 2) {
        throw invalid_parameter("linear grid needs from < to and points >= 2");
    }
    std::vector<double> g(points);
    const double step = (to - from) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = from + step * static_cast<double>(i);
    }
    g.back() = to;
    return g;
}

} // namespace mblaser
