#pragma once

// Run configuration: a flat key=value file merged with command-line
// overrides, validated into a RunConfig.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mblaser/analysis.hpp"
#include "mblaser/csv.hpp"
#include "mblaser/dynamics.hpp"
#include "mblaser/errors.hpp"
#include "mblaser/model.hpp"

namespace mblaser::config {

/// Validation failure; `where` names the file line or flag, `field` the key.
class config_error : public error {
public:
    config_error(std::string where, std::string field, const std::string& message)
        : error(compose(where, field, message)), where_(std::move(where)), field_(std::move(field))
    {
    }
    const std::string& where() const { return where_; }
    const std::string& field() const { return field_; }

private:
    static std::string compose(const std::string& where, const std::string& field, const std::string& message)
    {
        std::string out;
        if (!where.empty()) {
            out += where + ": ";
        }
        if (!field.empty()) {
            out += "field '" + field + "': ";
        }
        return out + message;
    }
    std::string where_;
    std::string field_;
};

enum class Command { steady, sweep, thresholds, integrate };

inline constexpr std::string_view dimensionless_keys[] = {"lam", "sat", "alpha1", "alpha2", "eta"};
inline constexpr std::string_view physical_keys[] = {"n_atoms",  "coupling", "cavity_decay", "gamma_10",
                                                     "gamma_21", "gamma_02", "gamma_col"};
inline constexpr std::string_view other_keys[] = {
    "scheme",  "from",     "to",       "points", "spacing",            "sat_list",        "rel_tol",
    "abs_tol", "max_step", "t_end",    "init",   "convergence_window", "convergence_eps", "samples",
    "output",  "format",
};

inline bool is_known_key(std::string_view key)
{
    for (auto list : {std::span<const std::string_view>(dimensionless_keys),
                      std::span<const std::string_view>(physical_keys), std::span<const std::string_view>(other_keys)}) {
        for (auto k : list) {
            if (k == key) {
                return true;
            }
        }
    }
    return false;
}

struct Entry {
    std::string value;
    std::string origin; // "file.cfg:3" or "--lam"
};

using KeyValues = std::map<std::string, Entry, std::less<>>;

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// Parses `key = value` lines; `#` starts a comment. Keys are lowercase
/// snake case; duplicates and unknown keys are errors.
inline KeyValues parse_key_values(std::istream& in, const std::string& source)
{
    KeyValues out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        const std::string where = source + ":" + std::to_string(lineno);
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string text = trim(line);
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw config_error(where, "", "expected key=value");
        }
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (!is_known_key(key)) {
            throw config_error(where, key, "unknown key");
        }
        if (out.contains(key)) {
            throw config_error(where, key, "duplicate key");
        }
        out[key] = Entry{value, where};
    }
    return out;
}

inline double parse_number(const Entry& e, std::string_view key)
{
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || e.value.empty()) {
        throw config_error(e.origin, std::string(key), "invalid number '" + e.value + "'");
    }
    return v;
}

inline std::vector<double> parse_number_list(const Entry& e, std::string_view key)
{
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_number(Entry{trim(item), e.origin}, key));
    }
    if (out.empty()) {
        throw config_error(e.origin, std::string(key), "empty list");
    }
    return out;
}

struct RunConfig {
    Scheme scheme = Scheme::lambda;
    std::optional<DimensionlessParams> dimensionless;
    std::optional<PhysicalParams> physical;

    std::optional<double> grid_from;
    std::optional<double> grid_to;
    std::size_t points = 200;
    bool log_spacing = true;
    std::vector<double> sat_list;

    IntegratorSettings integrator;
    std::optional<LaserState> init;
    std::size_t samples = 201;

    std::string output;
    std::string format = "text";

    /// Canonical parameters; physical input is nondimensionalized.
    DimensionlessParams params() const { return physical ? nondimensionalize(*physical) : *dimensionless; }
};

namespace detail {

inline bool pump_required(Command cmd) { return cmd == Command::steady || cmd == Command::integrate; }

inline std::string_view pump_key(Scheme s, bool physical)
{
    if (physical) {
        return s == Scheme::lambda ? "gamma_21" : "gamma_02";
    }
    return s == Scheme::lambda ? "alpha1" : "alpha2";
}

} // namespace detail

/// Builds and validates a RunConfig for `cmd` from merged key/values.
inline RunConfig build(const KeyValues& kv, Command cmd)
{
    RunConfig cfg;
    auto get = [&](std::string_view key) -> const Entry* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto number = [&](std::string_view key) -> std::optional<double> {
        const Entry* e = get(key);
        return e ? std::optional<double>(parse_number(*e, key)) : std::nullopt;
    };

    const Entry* scheme = get("scheme");
    if (!scheme) {
        throw config_error("", "scheme", "missing required field");
    }
    try {
        cfg.scheme = parse_scheme(scheme->value);
    } catch (const invalid_parameter& e) {
        throw config_error(scheme->origin, "scheme", e.what());
    }

    bool has_dimless = false, has_physical = false;
    for (auto k : dimensionless_keys) {
        has_dimless = has_dimless || get(k);
    }
    for (auto k : physical_keys) {
        has_physical = has_physical || get(k);
    }
    if (has_dimless == has_physical) {
        throw config_error("", "", "exactly one parameter block is required: dimensionless (lam, sat, alpha1, "
                                   "alpha2, eta) or physical (n_atoms, coupling, cavity_decay, gamma_10, "
                                   "gamma_21, gamma_02, gamma_col)");
    }

    const std::string_view pump = detail::pump_key(cfg.scheme, has_physical);
    auto required = [&](std::string_view key) -> double {
        if (auto v = number(key)) {
            return *v;
        }
        if (key == pump && !detail::pump_required(cmd)) {
            return 0.0;
        }
        if (key == "eta" || key == "gamma_col" || (key == "sat" && get("sat_list"))) {
            return 0.0;
        }
        throw config_error("", std::string(key), "missing required field");
    };

    if (has_dimless) {
        DimensionlessParams d{required("lam"), required("sat"), required("alpha1"), required("alpha2"),
                              required("eta")};
        try {
            d.validate();
        } catch (const invalid_parameter& e) {
            throw config_error("", "", e.what());
        }
        cfg.dimensionless = d;
    } else {
        PhysicalParams p{required("n_atoms"),  required("coupling"), required("cavity_decay"), required("gamma_10"),
                         required("gamma_21"), required("gamma_02"), required("gamma_col")};
        try {
            p.validate();
        } catch (const invalid_parameter& e) {
            throw config_error("", "", e.what());
        }
        cfg.physical = p;
    }

    cfg.grid_from = number("from");
    cfg.grid_to = number("to");
    if (cfg.grid_from && cfg.grid_to && !(*cfg.grid_from < *cfg.grid_to)) {
        throw config_error(get("to")->origin, "to", "grid needs from < to");
    }
    if (auto v = number("points")) {
        if (!(*v >= 2.0) || *v != std::floor(*v) || *v > 1e8) {
            throw config_error(get("points")->origin, "points", "must be an integer >= 2");
        }
        cfg.points = static_cast<std::size_t>(*v);
    }
    if (const Entry* e = get("spacing")) {
        if (e->value == "log") {
            cfg.log_spacing = true;
        } else if (e->value == "linear") {
            cfg.log_spacing = false;
        } else {
            throw config_error(e->origin, "spacing", "expected log or linear");
        }
    }
    if (cfg.log_spacing && cfg.grid_from && !(*cfg.grid_from > 0.0)) {
        throw config_error(get("from")->origin, "from", "log grid needs from > 0");
    }
    if (const Entry* e = get("sat_list")) {
        cfg.sat_list = parse_number_list(*e, "sat_list");
        for (double s : cfg.sat_list) {
            if (!(s >= 0.0) || !std::isfinite(s)) {
                throw config_error(e->origin, "sat_list", "values must be finite and >= 0");
            }
        }
    }

    IntegratorSettings& is = cfg.integrator;
    is.rel_tol = number("rel_tol").value_or(is.rel_tol);
    is.abs_tol = number("abs_tol").value_or(is.abs_tol);
    is.max_step = number("max_step").value_or(is.max_step);
    is.t_end = number("t_end").value_or(is.t_end);
    is.convergence_window = number("convergence_window").value_or(is.convergence_window);
    is.convergence_eps = number("convergence_eps").value_or(is.convergence_eps);
    try {
        is.validate();
    } catch (const invalid_parameter& e) {
        throw config_error("", "", e.what());
    }
    if (auto v = number("samples")) {
        if (!(*v >= 2.0) || *v != std::floor(*v) || *v > 1e8) {
            throw config_error(get("samples")->origin, "samples", "must be an integer >= 2");
        }
        cfg.samples = static_cast<std::size_t>(*v);
    }
    if (const Entry* e = get("init")) {
        const auto v = parse_number_list(*e, "init");
        if (v.size() != 5) {
            throw config_error(e->origin, "init", "expected n,x,rho00,rho11,rho22");
        }
        cfg.init = LaserState{v[0], v[1], v[2], v[3], v[4]};
        try {
            mblaser::detail::check_initial(*cfg.init);
        } catch (const invalid_parameter& ex) {
            throw config_error(e->origin, "init", ex.what());
        }
    }

    if (const Entry* e = get("output")) {
        cfg.output = e->value;
    }
    if (const Entry* e = get("format")) {
        if (e->value != "text" && e->value != "csv") {
            throw config_error(e->origin, "format", "expected text or csv");
        }
        cfg.format = e->value;
    }
    return cfg;
}

/// Key/values in canonical form (sorted keys); parsing the result yields the
/// same RunConfig.
inline std::string dump(const KeyValues& kv)
{
    std::string out;
    for (const auto& [k, e] : kv) {
        out += k + "=" + e.value + "\n";
    }
    return out;
}

} // namespace mblaser::config
