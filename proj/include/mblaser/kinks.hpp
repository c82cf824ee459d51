#pragma once

// Threshold-kink location on photon-number-vs-pump curves.
//
// A kink is a convex knee of log10(n) against log10(pump): a local maximum of
// the (positive) second derivative. Lasing onset and the V-scheme breakdown
// both appear as such knees, while high-pump saturation bends the curve the
// other way and is not reported.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mblaser/analysis.hpp"
#include "mblaser/errors.hpp"

namespace mblaser {

struct KinkOptions {
    /// Peak curvature must exceed this multiple of the median |curvature|.
    double relative_prominence = 3.0;
    /// ... and this absolute floor, in decades^-1 on log-log axes. A
    /// saturating n ~ P/(a + P) bend peaks at ln(10)/4 ~ 0.58.
    double min_curvature = 1.0;
    std::size_t min_points = 16;
};

/// Second derivative of log10(n) against log10(pump) at interior points
/// (three-point stencil, nonuniform spacing allowed). Entry i belongs to
/// point i + 1.
inline std::vector<double> log_log_curvature(std::span<const double> pump, std::span<const double> photons)
{
    if (pump.size() != photons.size()) {
        throw invalid_parameter("pump and photon columns differ in length");
    }
    std::vector<double> k;
    if (pump.size() < 3) {
        return k;
    }
    k.reserve(pump.size() - 2);
    for (std::size_t i = 1; i + 1 < pump.size(); ++i) {
        const double u0 = std::log10(pump[i - 1]), u1 = std::log10(pump[i]), u2 = std::log10(pump[i + 1]);
        const double v0 = std::log10(photons[i - 1]), v1 = std::log10(photons[i]), v2 = std::log10(photons[i + 1]);
        const double h1 = u1 - u0, h2 = u2 - u1;
        k.push_back(2.0 * ((v2 - v1) / h2 - (v1 - v0) / h1) / (h1 + h2));
    }
    return k;
}

/// Pump values at detected kinks, in increasing order. Points with
/// non-finite or non-positive n or pump are skipped.
inline std::vector<double> detect_kinks(std::span<const double> pump, std::span<const double> photons,
                                        const KinkOptions& opt = {})
{
    if (pump.size() != photons.size()) {
        throw invalid_parameter("pump and photon columns differ in length");
    }
    if (pump.size() < opt.min_points) {
        throw invalid_parameter("kink detection needs at least " + std::to_string(opt.min_points) + " points");
    }
    std::vector<double> p, n;
    for (std::size_t i = 0; i < pump.size(); ++i) {
        if (std::isfinite(pump[i]) && pump[i] > 0.0 && std::isfinite(photons[i]) && photons[i] > 0.0) {
            p.push_back(pump[i]);
            n.push_back(photons[i]);
        }
    }
    const std::vector<double> k = log_log_curvature(p, n);
    std::vector<double> kinks;
    if (k.size() < 3) {
        return kinks;
    }
    std::vector<double> mag(k.size());
    std::transform(k.begin(), k.end(), mag.begin(), [](double v) { return std::abs(v); });
    auto mid = mag.begin() + static_cast<std::ptrdiff_t>(mag.size() / 2);
    std::nth_element(mag.begin(), mid, mag.end());
    const double median = *mid;
    const double floor = std::max(opt.relative_prominence * median, opt.min_curvature);

    for (std::size_t i = 0; i < k.size(); ++i) {
        const bool left = i == 0 || k[i] > k[i - 1];
        const bool right = i + 1 == k.size() || k[i] >= k[i + 1];
        if (left && right && k[i] > floor) {
            kinks.push_back(p[i + 1]);
        }
    }
    return kinks;
}

inline std::vector<double> detect_kinks(const SweepTable& table, const KinkOptions& opt = {})
{
    std::vector<double> pump, n;
    pump.reserve(table.rows.size());
    n.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        pump.push_back(r.pump);
        n.push_back(r.photons);
    }
    return detect_kinks(pump, n, opt);
}

} // namespace mblaser
