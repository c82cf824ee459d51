// mblaser: steady states, thresholds, sweeps and trajectories of closed
// three-level Lambda / V lasers.
//
// Exit codes: 0 ok, 2 configuration error, 3 no lasing or spurious steady
// state, 4 I/O error, 5 integration failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "mblaser/analysis.hpp"
#include "mblaser/config.hpp"
#include "mblaser/csv.hpp"
#include "mblaser/dynamics.hpp"
#include "mblaser/kinks.hpp"
#include "mblaser/model.hpp"

namespace {

using namespace mblaser;
using config::Command;
using config::RunConfig;
using csv::format_double;

enum Exit : int { ok = 0, config_failure = 2, no_lasing_or_spurious = 3, io_failure = 4, integration_failure = 5 };

class io_error : public error {
public:
    using error::error;
};

/// Output sink: the --output file, or stdout.
class Sink {
public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) {
                throw io_error("cannot open output file '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    bool to_terminal() const { return !file_.is_open() && isatty(fileno(stdout)); }
    void close(const std::string& path)
    {
        if (file_.is_open()) {
            file_.close();
            if (!file_) {
                throw io_error("failed writing '" + path + "'");
            }
        } else {
            std::cout.flush();
        }
    }

private:
    std::ofstream file_;
};

bool use_color(const Sink& sink) { return sink.to_terminal() && std::getenv("NO_COLOR") == nullptr; }

std::string paint(const std::string& text, const char* code, bool color)
{
    return color ? std::string("\033[") + code + "m" + text + "\033[0m" : text;
}

std::string regime_color(Regime r)
{
    switch (r) {
    case Regime::lasing:
        return "32";
    case Regime::no_lasing:
    case Regime::above_breakdown:
        return "31";
    case Regime::below_threshold:
        break;
    }
    return "33";
}

// ---------------------------------------------------------------------------

int run_steady(const RunConfig& cfg)
{
    const DimensionlessParams d = cfg.params();
    const SteadyState ss = steady_state_full(d);
    const double pump = d.pump(cfg.scheme);
    const Regime regime = classify_regime(d, cfg.scheme, pump);
    const LaserState& s = ss.state;

    Sink sink(cfg.output);
    std::ostream& os = sink.stream();
    if (cfg.format == "csv") {
        os << "n,x,rho00,rho11,rho22,D,beta,gamma_perp,regime,physical\n";
        os << format_double(s.photons) << ',' << format_double(s.polarization) << ',' << format_double(s.pop0)
           << ',' << format_double(s.pop1) << ',' << format_double(s.pop2) << ',' << format_double(s.inversion())
           << ',' << format_double(beta_factor(d)) << ',' << format_double(gamma_perp(d)) << ','
           << to_string(regime) << ',' << (ss.physical ? "true" : "false") << '\n';
    } else {
        const bool color = use_color(sink);
        os << "scheme      " << to_string(cfg.scheme) << '\n';
        os << "pump        " << format_double(pump) << '\n';
        os << "n           " << format_double(s.photons) << '\n';
        os << "x           " << format_double(s.polarization) << '\n';
        os << "rho00       " << format_double(s.pop0) << '\n';
        os << "rho11       " << format_double(s.pop1) << '\n';
        os << "rho22       " << format_double(s.pop2) << '\n';
        os << "D           " << format_double(s.inversion()) << '\n';
        os << "beta        " << format_double(beta_factor(d)) << '\n';
        os << "gamma_perp  " << format_double(gamma_perp(d)) << "  (units of gamma_10)\n";
        os << "regime      " << paint(std::string(to_string(regime)), regime_color(regime).c_str(), color) << '\n';
        os << "physical    "
           << (ss.physical ? paint("yes", "32", color) : paint("no (spurious branch)", "31", color)) << '\n';
        os << "residual    " << format_double(ss.residual) << '\n';
    }
    sink.close(cfg.output);
    return ss.physical ? Exit::ok : Exit::no_lasing_or_spurious;
}

std::vector<double> sweep_grid(const RunConfig& cfg, const DimensionlessParams& d)
{
    double from = 0.0, to = 0.0;
    if (cfg.scheme == Scheme::lambda) {
        from = cfg.grid_from.value_or(1e-3);
        to = cfg.grid_to.value_or(1e3);
    } else {
        from = cfg.grid_from.value_or(0.5);
        if (cfg.grid_to) {
            to = *cfg.grid_to;
        } else {
            double estimate = 1e3;
            if (d.alpha1 > 0.0 && d.lam > 0.0 && d.sat > 0.0) {
                estimate = v_thresholds_approx(d).p_max;
            }
            to = 2.0 * estimate;
        }
    }
    if (!(to > from)) {
        throw config::config_error("", "to", "grid upper end " + format_double(to) + " is not above " + format_double(from));
    }
    return cfg.log_spacing ? log_grid(from, to, cfg.points) : linear_grid(from, to, cfg.points);
}

std::string suffixed_path(const std::string& output, double sat)
{
    const std::filesystem::path p(output);
    std::string name = p.stem().string() + "_sat" + format_double(sat) + p.extension().string();
    return (p.parent_path() / name).string();
}

int run_sweep(const RunConfig& cfg)
{
    const DimensionlessParams base = cfg.params();
    if (cfg.sat_list.empty()) {
        const auto grid = sweep_grid(cfg, base);
        const SweepTable table = sweep(base, cfg.scheme, grid);
        Sink sink(cfg.output);
        csv::write_sweep(sink.stream(), table);
        sink.close(cfg.output);
        return Exit::ok;
    }
    if (cfg.output.empty()) {
        throw config::config_error("", "output", "sat_list writes one file per value and needs --output");
    }
    for (double s : cfg.sat_list) {
        DimensionlessParams d = base;
        d.sat = s;
        const auto grid = sweep_grid(cfg, d);
        const SweepTable table = sweep(d, cfg.scheme, grid);
        const std::string path = suffixed_path(cfg.output, s);
        Sink sink(path);
        csv::write_sweep(sink.stream(), table);
        sink.close(path);
    }
    return Exit::ok;
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_report_csv_row(std::ostream& os, const ThresholdReport& r)
{
    os << to_string(r.scheme) << ',' << to_string(r.method) << ',' << format_double(r.p_thr) << ','
       << optional_field(r.p_max) << ',' << optional_field(r.s_max) << ',' << format_double(r.beta) << ','
       << format_double(r.beta_min) << '\n';
}

int run_thresholds(const RunConfig& cfg)
{
    const DimensionlessParams d = cfg.params();
    Sink sink(cfg.output);
    std::ostream& os = sink.stream();
    const bool csv_out = cfg.format == "csv";
    const bool color = use_color(sink);
    int code = Exit::ok;

    if (csv_out) {
        os << "scheme,method,p_thr,p_max,s_max,beta,beta_min\n";
    }
    if (cfg.scheme == Scheme::lambda) {
        try {
            const ThresholdReport r = lambda_report(d);
            if (csv_out) {
                write_report_csv_row(os, r);
            } else {
                os << "scheme    lambda (pump P1 = alpha1)\n";
                os << "P1_thr    " << format_double(r.p_thr) << '\n';
                os << "S         " << format_double(d.sat) << '\n';
                os << "S_max     " << format_double(*r.s_max) << '\n';
                os << "beta      " << format_double(r.beta) << '\n';
                os << "beta_min  " << format_double(r.beta_min) << '\n';
            }
        } catch (const no_lasing& e) {
            std::cerr << "no lasing: " << e.what() << '\n';
            if (!csv_out) {
                os << paint("no lasing", "31", color) << ": S = " << format_double(d.sat)
                   << " >= S_max = " << format_double(s_max_lambda(d)) << " (beta = " << format_double(beta_factor(d))
                   << " <= beta_min = " << format_double(beta_min(d)) << ")\n";
            }
            code = Exit::no_lasing_or_spurious;
        }
    } else {
        const ThresholdReport approx = v_report(d, ThresholdMethod::expansion);
        try {
            const ThresholdReport exact = v_report(d, ThresholdMethod::exact_root);
            if (csv_out) {
                write_report_csv_row(os, exact);
                write_report_csv_row(os, approx);
            } else {
                auto rel = [](double a, double e) { return std::isfinite(e) ? std::abs(a - e) / e : 0.0; };
                os << "scheme        v (pump P2 = alpha2)\n";
                os << "              exact                  expansion              rel. difference\n";
                os << "P2_thr        " << format_double(exact.p_thr) << "  " << format_double(approx.p_thr) << "  "
                   << format_double(rel(approx.p_thr, exact.p_thr)) << '\n';
                os << "P2_max        " << format_double(*exact.p_max) << "  " << format_double(*approx.p_max) << "  "
                   << format_double(rel(*approx.p_max, *exact.p_max)) << '\n';
                os << "beta(P2_thr)  " << format_double(exact.beta) << '\n';
                os << "beta(P2_max)  " << format_double(exact.beta_min) << '\n';
            }
        } catch (const empty_window& e) {
            std::cerr << "no lasing: " << e.what() << '\n';
            if (csv_out) {
                write_report_csv_row(os, approx);
            } else {
                os << paint("no lasing", "31", color) << ": the pump window P2_thr < P2 < P2_max is empty\n";
                os << "expansion     P2_thr = " << format_double(approx.p_thr)
                   << ", P2_max = " << format_double(*approx.p_max) << '\n';
            }
            code = Exit::no_lasing_or_spurious;
        }
    }
    sink.close(cfg.output);
    return code;
}

int run_integrate(const RunConfig& cfg)
{
    PhysicalParams p;
    if (cfg.physical) {
        p = *cfg.physical;
    } else {
        try {
            p = realize(*cfg.dimensionless);
        } catch (const invalid_parameter& e) {
            throw config::config_error("", "sat", e.what());
        }
    }
    const LaserState init = cfg.init.value_or(ground_state(cfg.scheme));
    const double t_end = cfg.integrator.t_end;
    std::vector<double> times(cfg.samples);
    for (std::size_t i = 0; i < times.size(); ++i) {
        times[i] = t_end * static_cast<double>(i) / static_cast<double>(times.size() - 1);
    }
    times.back() = t_end;

    const Trajectory traj = integrate(init, p, cfg.integrator, times);
    Sink sink(cfg.output);
    csv::write_trajectory(sink.stream(), traj, traj.converged_at.has_value());
    sink.close(cfg.output);
    if (!traj.converged_at) {
        std::cerr << "no convergence: state still changing by more than " << format_double(cfg.integrator.convergence_eps)
                  << " per window of " << format_double(cfg.integrator.convergence_window)
                  << " at t_end = " << format_double(t_end) << "; retry with a larger t_end\n";
        return Exit::integration_failure;
    }
    return Exit::ok;
}

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

constexpr FlagSpec flag_specs[] = {
    {"--scheme", "scheme", "pumping scheme: lambda or v"},
    {"--lam", "lam", "lambda = N gamma_10 / (2 kappa)"},
    {"--sat", "sat", "saturation parameter S = gamma_10^2 / (4 g^2)"},
    {"--alpha1", "alpha1", "gamma_21 / gamma_10 (Lambda pump P1)"},
    {"--alpha2", "alpha2", "gamma_02 / gamma_10 (V pump P2)"},
    {"--eta", "eta", "gamma_col / gamma_10"},
    {"--n-atoms", "n_atoms", "number of atoms N"},
    {"--coupling", "coupling", "coupling constant g"},
    {"--cavity-decay", "cavity_decay", "cavity decay rate kappa"},
    {"--gamma10", "gamma_10", "decay rate |1> -> |0>"},
    {"--gamma21", "gamma_21", "rate |2> -> |1>"},
    {"--gamma02", "gamma_02", "rate |0> -> |2>"},
    {"--gamma-col", "gamma_col", "collisional dephasing rate"},
    {"--from", "from", "first grid pump value"},
    {"--to", "to", "last grid pump value"},
    {"--points", "points", "number of grid points (default 200)"},
    {"--spacing", "spacing", "log or linear (default log)"},
    {"--sat-list", "sat_list", "comma-separated S values, one sweep file each"},
    {"--rel-tol", "rel_tol", "integrator relative tolerance"},
    {"--abs-tol", "abs_tol", "integrator absolute tolerance"},
    {"--max-step", "max_step", "largest integrator step (1/gamma_10)"},
    {"--t-end", "t_end", "integration end time (1/gamma_10)"},
    {"--window", "convergence_window", "convergence window (1/gamma_10)"},
    {"--eps", "convergence_eps", "convergence threshold"},
    {"--init", "init", "initial state n,x,rho00,rho11,rho22"},
    {"--samples", "samples", "trajectory output samples (default 201)"},
    {"--output", "output", "output path (default stdout)"},
    {"--format", "format", "text or csv"},
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Steady states, thresholds, sweeps and trajectories of closed three-level lasers"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    bool dump_config = false;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_flag("--dump-config", dump_config, "print the merged configuration and exit");

    std::vector<std::string> values(std::size(flag_specs));
    std::vector<CLI::Option*> options;
    for (std::size_t i = 0; i < std::size(flag_specs); ++i) {
        options.push_back(app.add_option(flag_specs[i].flag, values[i], flag_specs[i].help));
    }

    auto* steady_cmd = app.add_subcommand("steady", "closed-form steady state and physicality check");
    auto* sweep_cmd = app.add_subcommand("sweep", "closed-form sweep of the pump parameter to CSV");
    auto* thresholds_cmd = app.add_subcommand("thresholds", "threshold, breakdown, S_max and beta_min");
    auto* integrate_cmd = app.add_subcommand("integrate", "time-domain trajectory to CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Exit::config_failure;
    }

    Command cmd = Command::steady;
    if (sweep_cmd->parsed()) {
        cmd = Command::sweep;
    } else if (thresholds_cmd->parsed()) {
        cmd = Command::thresholds;
    } else if (integrate_cmd->parsed()) {
        cmd = Command::integrate;
    } else if (!steady_cmd->parsed()) {
        return Exit::config_failure;
    }

    try {
        config::KeyValues kv;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot read config file '" << config_path << "'\n";
                return Exit::config_failure;
            }
            kv = config::parse_key_values(in, config_path);
        }
        for (std::size_t i = 0; i < std::size(flag_specs); ++i) {
            if (options[i]->count() > 0) {
                kv[flag_specs[i].key] = config::Entry{values[i], flag_specs[i].flag};
            }
        }
        const RunConfig cfg = config::build(kv, cmd);
        if (dump_config) {
            std::cout << config::dump(kv);
            return Exit::ok;
        }
        switch (cmd) {
        case Command::steady:
            return run_steady(cfg);
        case Command::sweep:
            return run_sweep(cfg);
        case Command::thresholds:
            return run_thresholds(cfg);
        case Command::integrate:
            return run_integrate(cfg);
        }
    } catch (const config::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config_failure;
    } catch (const io_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return Exit::io_failure;
    } catch (const no_lasing& e) {
        std::cerr << "no lasing: " << e.what() << '\n';
        return Exit::no_lasing_or_spurious;
    } catch (const empty_window& e) {
        std::cerr << "no lasing: " << e.what() << '\n';
        return Exit::no_lasing_or_spurious;
    } catch (const step_size_underflow& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return Exit::integration_failure;
    } catch (const non_finite& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return Exit::integration_failure;
    } catch (const no_convergence& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return Exit::integration_failure;
    } catch (const invalid_parameter& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config_failure;
    }
    return Exit::ok;
}
