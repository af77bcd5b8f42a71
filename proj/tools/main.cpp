#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavekin/config.hpp"
#include "wavekin/errors.hpp"
#include "wavekin/model_example.hpp"
#include "wavekin/observables.hpp"
#include "wavekin/quadrature.hpp"

namespace {

using wavekin::CentroidKind;
using wavekin::ConvergenceReport;
using wavekin::DispersionRelation;
using wavekin::GridSpec;
using wavekin::KinematicState;
using wavekin::RunConfig;
using wavekin::Vec3;

using ordered_json = nlohmann::ordered_json;

// Shortest-exact decimal form; fixed renderer keeps outputs byte-reproducible.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct SharedFlags {
    std::optional<int> grid_n;
    std::optional<double> margin;
    std::optional<double> tol;
    std::optional<int> max_n;
    std::optional<int> threads;
    std::optional<std::string> output;
    std::optional<std::string> format;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--grid-n", grid_n, "Points per axis (run/check) or ladder start (converge)");
        cmd->add_option("--grid-margin", margin, "Grid box margin in packet widths (>= 4)");
        cmd->add_option("--tol", tol, "Convergence tolerance, or uniform check threshold for 'check'");
        cmd->add_option("--max-n", max_n, "Per-axis cap for grid refinement");
        cmd->add_option("--threads", threads, "Worker threads (0 = hardware)");
        cmd->add_option("--output", output, "Output file (default stdout)");
        cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    }

    void apply(RunConfig& cfg) const {
        if (grid_n) {
            if (*grid_n < 8) throw wavekin::DomainError("--grid-n must be >= 8");
            cfg.grid.points_per_axis = *grid_n;
            if (cfg.grid.max_n < *grid_n) cfg.grid.max_n = *grid_n;
        }
        if (margin) cfg.grid.margin = *margin;
        if (tol) {
            if (!(*tol > 0.0)) throw wavekin::DomainError("--tol must be > 0");
            cfg.grid.tol = *tol;
        }
        if (max_n) cfg.grid.max_n = *max_n;
        if (output) cfg.output.path = *output;
        if (format) cfg.output.format = *format;
    }
};

// Buffered so results replace the target file atomically enough for reruns and
// never interleave with warnings on stderr.
void deliver(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wavekin::ConfigError("cannot open output file " + path);
    out << body;
    if (!out) throw wavekin::ConfigError("failed writing output file " + path);
}

GridSpec working_spec(const RunConfig& cfg) {
    if (cfg.field.is_gaussian())
        return wavekin::auto_grid(cfg.field, cfg.grid.margin, cfg.grid.points_per_axis);
    return cfg.field.grid_spec();
}

int resolved_threads(const SharedFlags& flags) { return flags.threads ? *flags.threads : 0; }

// ---------------------------------------------------------------------------
// run

int cmd_run(const std::string& config_path, const SharedFlags& flags) {
    RunConfig cfg = wavekin::load_run_config(config_path);
    flags.apply(cfg);
    const GridSpec spec = working_spec(cfg);
    const auto states = wavekin::trajectory(cfg.field, cfg.dispersion, spec, cfg.time.t0,
                                            cfg.time.t1, cfg.time.steps, resolved_threads(flags));

    static const char* kColumns[] = {
        "t",       "norm",    "px",      "py",      "pz",      "E",       "rx",      "ry",
        "rz",      "rEx",     "rEy",     "rEz",     "vgx",     "vgy",     "vgz",     "vEx",
        "vEy",     "vEz",     "Lx",      "Ly",      "Lz",      "Nx",      "Ny",      "Nz",
        "Lext_px", "Lext_py", "Lext_pz", "Lint_px", "Lint_py", "Lint_pz", "Lext_ex", "Lext_ey",
        "Lext_ez", "Lint_ex", "Lint_ey", "Lint_ez"};

    auto values = [](const KinematicState& s) {
        return std::vector<double>{s.t,
                                   s.norm,
                                   s.p_mean.x,
                                   s.p_mean.y,
                                   s.p_mean.z,
                                   s.E_mean,
                                   s.r_prob.x,
                                   s.r_prob.y,
                                   s.r_prob.z,
                                   s.r_energy.x,
                                   s.r_energy.y,
                                   s.r_energy.z,
                                   s.v_group.x,
                                   s.v_group.y,
                                   s.v_group.z,
                                   s.v_energy.x,
                                   s.v_energy.y,
                                   s.v_energy.z,
                                   s.L_total.x,
                                   s.L_total.y,
                                   s.L_total.z,
                                   s.N_boost.x,
                                   s.N_boost.y,
                                   s.N_boost.z,
                                   s.L_ext_prob.x,
                                   s.L_ext_prob.y,
                                   s.L_ext_prob.z,
                                   s.L_int_prob.x,
                                   s.L_int_prob.y,
                                   s.L_int_prob.z,
                                   s.L_ext_energy.x,
                                   s.L_ext_energy.y,
                                   s.L_ext_energy.z,
                                   s.L_int_energy.x,
                                   s.L_int_energy.y,
                                   s.L_int_energy.z};
    };

    std::ostringstream body;
    if (cfg.output.format == "csv") {
        body << "# wavekin-trajectory-v1\n";
        for (std::size_t i = 0; i < std::size(kColumns); ++i)
            body << (i ? "," : "") << kColumns[i];
        body << "\n";
        for (const auto& s : states) {
            const auto row = values(s);
            for (std::size_t i = 0; i < row.size(); ++i) body << (i ? "," : "") << num(row[i]);
            body << "\n";
        }
    } else {
        ordered_json j;
        j["format"] = "wavekin-trajectory-v1";
        ordered_json rows = ordered_json::array();
        for (const auto& s : states) {
            ordered_json r;
            const auto row = values(s);
            for (std::size_t i = 0; i < row.size(); ++i) r[kColumns[i]] = row[i];
            rows.push_back(std::move(r));
        }
        j["rows"] = std::move(rows);
        body << j.dump(2) << "\n";
    }
    deliver(cfg.output.path, body.str());
    return 0;
}

// ---------------------------------------------------------------------------
// fig1

void emit_kv(std::ostringstream& body, ordered_json& j, const std::string& key, double v) {
    body << key << "," << num(v) << "\n";
    j[key] = v;
}

void emit_kv(std::ostringstream& body, ordered_json& j, const std::string& key, const Vec3& v) {
    emit_kv(body, j, key + "_x", v.x);
    emit_kv(body, j, key + "_y", v.y);
    emit_kv(body, j, key + "_z", v.z);
}

void emit_kv(std::ostringstream& body, ordered_json& j, const std::string& key, bool v) {
    body << key << "," << (v ? "true" : "false") << "\n";
    j[key] = v;
}

void dump_levels(std::ostream& os, const ConvergenceReport& report) {
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const auto& [spec, value] = report.levels[i];
        os << "  level " << i << ": n = " << spec.n[0] << ", value =";
        if (std::holds_alternative<double>(value)) {
            os << " " << num(std::get<double>(value));
        } else {
            const Vec3 v = std::get<Vec3>(value);
            os << " (" << num(v.x) << ", " << num(v.y) << ", " << num(v.z) << ")";
        }
        os << "\n";
    }
    os << "  error estimate: " << num(report.error_estimate) << "\n";
}

int cmd_fig1(const SharedFlags& flags, int points, bool renormalize) {
    wavekin::ModelExampleOptions opts;
    opts.points = points;
    if (flags.grid_n) opts.points = *flags.grid_n;
    if (flags.margin) opts.margin = *flags.margin;
    if (flags.tol) opts.tol = *flags.tol;
    if (flags.max_n) opts.max_points = *flags.max_n;
    opts.renormalize = renormalize;
    opts.threads = resolved_threads(flags);
    if (opts.max_points < opts.points) opts.max_points = opts.points;

    const auto report = wavekin::model_example_report(opts);
    if (!report.converged) {
        std::cerr << "fig1: quadrature did not converge below tol " << num(opts.tol)
                  << " within the per-axis cap " << opts.max_points << "\n";
        std::cerr << "v_prob levels:\n";
        dump_levels(std::cerr, report.v_prob_convergence);
        std::cerr << "v_energy levels:\n";
        dump_levels(std::cerr, report.v_energy_convergence);
        return 4;
    }

    std::ostringstream csv;
    ordered_json j;
    csv << "# wavekin-fig1-v1\n";
    j["format"] = "wavekin-fig1-v1";
    emit_kv(csv, j, "weight_sum", report.weight_sum);
    emit_kv(csv, j, "renormalized", report.renormalized);
    emit_kv(csv, j, "p_approx", report.p_approx);
    emit_kv(csv, j, "E_approx", report.E_approx);
    emit_kv(csv, j, "v_prob_approx", report.v_prob_approx);
    emit_kv(csv, j, "v_prob_approx_mag", report.v_prob_approx.norm());
    emit_kv(csv, j, "v_energy_approx", report.v_energy_approx);
    emit_kv(csv, j, "v_energy_approx_mag", report.v_energy_approx.norm());
    emit_kv(csv, j, "angle_approx_deg", report.angle_approx_deg);
    emit_kv(csv, j, "norm_quad", report.norm_quad);
    emit_kv(csv, j, "p_quad", report.p_quad);
    emit_kv(csv, j, "E_quad", report.E_quad);
    emit_kv(csv, j, "v_prob_quad", report.v_prob_quad);
    emit_kv(csv, j, "v_prob_quad_mag", report.v_prob_quad.norm());
    emit_kv(csv, j, "v_energy_quad", report.v_energy_quad);
    emit_kv(csv, j, "v_energy_quad_mag", report.v_energy_quad.norm());
    emit_kv(csv, j, "angle_quad_deg", report.angle_quad_deg);
    emit_kv(csv, j, "final_points", static_cast<double>(report.final_points));
    emit_kv(csv, j, "rel_disagreement_v_prob", report.rel_disagreement_v_prob);
    emit_kv(csv, j, "rel_disagreement_v_energy", report.rel_disagreement_v_energy);
    emit_kv(csv, j, "disagreement_flag", report.disagreement_flag);
    emit_kv(csv, j, "speed_reference", report.speed_reference);

    const std::string format = flags.format ? *flags.format : "csv";
    const std::string path = flags.output ? *flags.output : "";
    deliver(path, format == "csv" ? csv.str() : j.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// check

struct CheckRow {
    std::string name;
    std::string status; // pass | fail | expected-violation | skipped
    double measured = 0.0;
    double tolerance = 0.0;
    std::string details;
};

// Least-squares slope of y(t); the trajectory's time samples are uniform.
double fitted_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    return sty / stt;
}

Vec3 fitted_slope3(const std::vector<KinematicState>& states, Vec3 KinematicState::* member) {
    std::vector<double> t, x, y, z;
    for (const auto& s : states) {
        t.push_back(s.t);
        x.push_back((s.*member).x);
        y.push_back((s.*member).y);
        z.push_back((s.*member).z);
    }
    return {fitted_slope(t, x), fitted_slope(t, y), fitted_slope(t, z)};
}

// Largest distance of any sample from the best-fit line through the samples.
double line_residual(const std::vector<KinematicState>& states, Vec3 KinematicState::* member) {
    const Vec3 slope = fitted_slope3(states, member);
    double tm = 0.0;
    Vec3 mean{0, 0, 0};
    for (const auto& s : states) {
        tm += s.t;
        mean = mean + s.*member;
    }
    tm /= static_cast<double>(states.size());
    mean = mean * (1.0 / static_cast<double>(states.size()));
    double worst = 0.0;
    for (const auto& s : states) {
        const Vec3 r = s.*member - (mean + slope * (s.t - tm));
        worst = std::max(worst, r.max_abs());
    }
    return worst;
}

int cmd_check(const std::string& config_path, const SharedFlags& flags) {
    RunConfig cfg = wavekin::load_run_config(config_path);
    flags.apply(cfg);
    const GridSpec spec = working_spec(cfg);
    const int threads = resolved_threads(flags);
    const auto states = wavekin::trajectory(cfg.field, cfg.dispersion, spec, cfg.time.t0,
                                            cfg.time.t1, cfg.time.steps, threads);
    const KinematicState& s0 = states.front();
    const bool relativistic = cfg.dispersion.relativistic_kind();
    const double c = cfg.dispersion.light_speed();

    // --tol replaces every pass threshold uniformly when given.
    auto tol_or = [&](double preset) { return flags.tol ? *flags.tol : preset; };

    std::vector<CheckRow> rows;

    {
        CheckRow r{"ehrenfest-quadratic", "skipped", 0.0, tol_or(1e-10),
                   "only defined for quadratic dispersion"};
        if (cfg.dispersion.kind() == DispersionRelation::Kind::Quadratic) {
            const Vec3 expected = s0.p_mean * (1.0 / cfg.dispersion.mass());
            r.measured = (s0.v_group - expected).max_abs() / std::max(expected.max_abs(), 1e-300);
            r.status = r.measured < r.tolerance ? "pass" : "fail";
            r.details = "relative gap between <v_g> and p_mean/m";
        }
        rows.push_back(r);
    }
    {
        CheckRow r{"relativistic-energy-centroid", "skipped", 0.0, tol_or(1e-12),
                   "only defined for relativistic dispersion"};
        if (relativistic) {
            const Vec3 expected = s0.p_mean * (c * c / s0.E_mean);
            r.measured = (s0.v_energy - expected).max_abs() / std::max(expected.max_abs(), 1e-300);
            r.status = r.measured < r.tolerance ? "pass" : "fail";
            r.details = "relative gap between v_E and c^2 p_mean/E_mean";
        }
        rows.push_back(r);
    }
    {
        CheckRow r{"conservation", "pass", 0.0, tol_or(1e-10), "max relative drift of norm;p;E;L"};
        double worst = 0.0;
        for (const auto& s : states) {
            worst = std::max(worst, std::fabs(s.norm - s0.norm) / s0.norm);
            worst = std::max(worst, std::fabs(s.E_mean - s0.E_mean) / std::fabs(s0.E_mean));
            worst = std::max(worst, (s.p_mean - s0.p_mean).max_abs() /
                                        std::max(s0.p_mean.max_abs(), 1e-300));
            worst = std::max(worst, (s.L_total - s0.L_total).max_abs() /
                                        std::max(s0.L_total.max_abs(), 1.0));
        }
        r.measured = worst;
        if (!(worst < r.tolerance)) r.status = "fail";
        rows.push_back(r);
    }
    {
        CheckRow r{"boost-conservation", "pass", 0.0, tol_or(1e-8), "max |N(t) - N(0)|"};
        double worst = 0.0;
        for (const auto& s : states) worst = std::max(worst, (s.N_boost - s0.N_boost).max_abs());
        r.measured = worst;
        if (relativistic) {
            if (!(worst < r.tolerance)) r.status = "fail";
        } else {
            r.status = "expected-violation";
            r.details = "conservation is not implied for this dispersion kind";
        }
        rows.push_back(r);
    }
    {
        CheckRow r{"am-ext-energy-conservation", "pass", 0.0, tol_or(1e-10),
                   "fitted |d/dt (r_E x p)|"};
        const Vec3 rate = fitted_slope3(states, &KinematicState::L_ext_energy);
        r.measured = rate.max_abs();
        if (relativistic) {
            if (!(r.measured < r.tolerance)) r.status = "fail";
        } else {
            r.status = "expected-violation";
            r.details = "v_E need not align with p_mean for this dispersion kind";
        }
        rows.push_back(r);
    }
    {
        CheckRow r{"am-ext-probability-conservation", "pass", 0.0, tol_or(1e-10),
                   "fitted |d/dt (r x p)|"};
        const Vec3 rate = fitted_slope3(states, &KinematicState::L_ext_prob);
        const Vec3 predicted = cross(s0.v_group, s0.p_mean);
        r.measured = rate.max_abs();
        if (predicted.max_abs() > r.tolerance) {
            r.status = "expected-violation";
            std::ostringstream d;
            d << "rate (" << num(rate.x) << ";" << num(rate.y) << ";" << num(rate.z)
              << ") matches v_g x p (" << num(predicted.x) << ";" << num(predicted.y) << ";"
              << num(predicted.z) << ")";
            r.details = d.str();
        } else if (!(r.measured < r.tolerance)) {
            r.status = "fail";
        }
        rows.push_back(r);
    }
    {
        CheckRow r{"subluminality", "skipped", 0.0, tol_or(1e-12),
                   "only defined for relativistic dispersion"};
        if (relativistic) {
            r.measured = std::max(s0.v_group.norm(), s0.v_energy.norm()) / c;
            r.status = r.measured <= 1.0 + r.tolerance ? "pass" : "fail";
            r.details = "max(|v_g|;|v_E|)/c";
        }
        rows.push_back(r);
    }
    {
        CheckRow r{"centroid-linearity", "pass", 0.0, tol_or(1e-9),
                   "max line-fit residual of r(t) and r_E(t)"};
        r.measured = std::max(line_residual(states, &KinematicState::r_prob),
                              line_residual(states, &KinematicState::r_energy));
        if (!(r.measured < r.tolerance)) r.status = "fail";
        rows.push_back(r);
    }

    bool all_ok = true;
    std::ostringstream csv;
    ordered_json j;
    csv << "# wavekin-check-v1\n";
    csv << "name,status,measured,tolerance,details\n";
    j["format"] = "wavekin-check-v1";
    ordered_json jrows = ordered_json::array();
    for (const auto& r : rows) {
        if (r.status == "fail") all_ok = false;
        csv << r.name << "," << r.status << "," << num(r.measured) << "," << num(r.tolerance)
            << "," << r.details << "\n";
        ordered_json row;
        row["name"] = r.name;
        row["status"] = r.status;
        row["measured"] = r.measured;
        row["tolerance"] = r.tolerance;
        row["details"] = r.details;
        jrows.push_back(std::move(row));
    }
    j["rows"] = std::move(jrows);

    deliver(cfg.output.path, cfg.output.format == "csv" ? csv.str() : j.dump(2) + "\n");
    return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// converge

int cmd_converge(const std::string& config_path, const SharedFlags& flags,
                 const std::string& observable, double t) {
    RunConfig cfg = wavekin::load_run_config(config_path);
    flags.apply(cfg);

    wavekin::ConvergeOptions opts;
    // The ladder start is deliberately small; grid.points_per_axis governs the
    // fixed-resolution commands instead.
    opts.initial_points = flags.grid_n ? *flags.grid_n : 33;
    opts.margin = cfg.grid.margin;
    opts.max_points = std::max(cfg.grid.max_n, opts.initial_points);
    opts.threads = resolved_threads(flags);

    const ConvergenceReport report =
        wavekin::converge(cfg.field, cfg.dispersion, observable, t, cfg.grid.tol, opts);

    std::ostringstream csv;
    ordered_json j;
    csv << "# wavekin-converge-v1\n";
    j["format"] = "wavekin-converge-v1";
    csv << "observable," << observable << "\n";
    j["observable"] = observable;
    emit_kv(csv, j, "t", t);
    emit_kv(csv, j, "tol", cfg.grid.tol);
    emit_kv(csv, j, "converged", report.converged);
    emit_kv(csv, j, "error_estimate", report.error_estimate);
    emit_kv(csv, j, "levels", static_cast<double>(report.levels.size()));
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const auto& [spec, value] = report.levels[i];
        const std::string key = "level_" + std::to_string(i);
        emit_kv(csv, j, key + "_points", static_cast<double>(spec.n[0]));
        if (std::holds_alternative<double>(value))
            emit_kv(csv, j, key + "_value", std::get<double>(value));
        else
            emit_kv(csv, j, key + "_value", std::get<Vec3>(value));
    }

    deliver(cfg.output.path, cfg.output.format == "csv" ? csv.str() : j.dump(2) + "\n");
    if (!report.converged) {
        std::cerr << "converge: " << observable << " did not settle below tol "
                  << num(cfg.grid.tol) << " within the per-axis cap " << opts.max_points << "\n";
        dump_levels(std::cerr, report);
        return 4;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavepacket kinematics: centroids, velocities and angular momentum of free "
                 "wavepackets under isotropic dispersion"};
    app.require_subcommand(1);

    SharedFlags run_flags, fig1_flags, check_flags, converge_flags;
    std::string run_config, check_config, converge_config;
    int fig1_points = 96;
    bool fig1_renormalize = false;
    std::string converge_observable = "E_mean";
    double converge_t = 0.0;

    CLI::App* run = app.add_subcommand("run", "Evaluate a trajectory of kinematic snapshots");
    run->add_option("config", run_config, "JSON run configuration")->required();
    run_flags.add_to(run);

    CLI::App* fig1 = app.add_subcommand(
        "fig1", "Built-in two-packet massless example: analytic vs quadrature route");
    fig1->add_option("--points", fig1_points, "Initial per-axis resolution");
    fig1->add_flag("--renormalize", fig1_renormalize, "Scale the second amplitude to weight 0.75");
    fig1_flags.add_to(fig1);

    CLI::App* check = app.add_subcommand("check", "Run the invariant suite on a configuration");
    check->add_option("config", check_config, "JSON run configuration")->required();
    check_flags.add_to(check);

    CLI::App* converge =
        app.add_subcommand("converge", "Refine the grid until one observable settles");
    converge->add_option("config", converge_config, "JSON run configuration")->required();
    converge->add_option("--observable", converge_observable,
                         "One of: norm, p_mean, E_mean, r_prob, r_energy, v_group, v_energy, "
                         "L_total, N_boost");
    converge->add_option("--t", converge_t, "Evaluation time");
    converge_flags.add_to(converge);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            if (run_flags.threads) wavekin::set_default_threads(*run_flags.threads);
            return cmd_run(run_config, run_flags);
        }
        if (fig1->parsed()) {
            if (fig1_flags.threads) wavekin::set_default_threads(*fig1_flags.threads);
            return cmd_fig1(fig1_flags, fig1_points, fig1_renormalize);
        }
        if (check->parsed()) {
            if (check_flags.threads) wavekin::set_default_threads(*check_flags.threads);
            return cmd_check(check_config, check_flags);
        }
        if (converge->parsed()) {
            if (converge_flags.threads) wavekin::set_default_threads(*converge_flags.threads);
            return cmd_converge(converge_config, converge_flags, converge_observable, converge_t);
        }
    } catch (const wavekin::NumericalConsistencyError& e) {
        std::cerr << "numerical consistency error: " << e.what() << "\n";
        return 3;
    } catch (const wavekin::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
