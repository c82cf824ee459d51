#pragma once

// CSV emission. Numbers use the shortest decimal form that round-trips the
// double exactly, independent of locale.

#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "mblaser/analysis.hpp"
#include "mblaser/dynamics.hpp"
#include "mblaser/format.hpp"

namespace mblaser::csv {

inline constexpr std::string_view sweep_header = "pump,n,x,rho00,rho11,rho22,D,beta,gamma_perp,regime";
inline constexpr std::string_view trajectory_header = "t,n,x,rho00,rho11,rho22";

using mblaser::format_double;

inline std::string_view regime_label(const SweepRow& row)
{
    switch (row.status) {
    case RowStatus::spurious:
        return "spurious";
    case RowStatus::failed:
        return "error";
    case RowStatus::physical:
        break;
    }
    return to_string(row.regime);
}

inline void write_sweep(std::ostream& os, const SweepTable& table)
{
    os << sweep_header << '\n';
    for (const auto& r : table.rows) {
        os << format_double(r.pump) << ',' << format_double(r.photons) << ',' << format_double(r.polarization)
           << ',' << format_double(r.pop0) << ',' << format_double(r.pop1) << ',' << format_double(r.pop2) << ','
           << format_double(r.inversion) << ',' << format_double(r.beta) << ',' << format_double(r.gamma_perp)
           << ',' << regime_label(r) << '\n';
    }
}

inline std::string trajectory_row(double t, const LaserState& s)
{
    std::string line = format_double(t);
    for (double v : {s.photons, s.polarization, s.pop0, s.pop1, s.pop2}) {
        line += ',';
        line += format_double(v);
    }
    return line;
}

/// Trajectory rows; when `steady` is set the last row is repeated as a
/// `# steady:` comment.
inline void write_trajectory(std::ostream& os, const Trajectory& traj, bool steady)
{
    os << trajectory_header << '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << trajectory_row(traj.times[i], traj.states[i]) << '\n';
    }
    if (steady && !traj.times.empty()) {
        os << "# steady: " << trajectory_row(traj.times.back(), traj.states.back()) << '\n';
    }
}

} // namespace mblaser::csv
