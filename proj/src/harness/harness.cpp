#include "oldroyd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "oldroyd/errors.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/operators.hpp"
#include "oldroyd/presets.hpp"
#include "oldroyd/snapshot.hpp"

namespace oldroyd {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void say(const CommandOptions& opts, const std::string& line) {
    if (opts.log) *opts.log << line << '\n';
}

std::filesystem::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
    std::filesystem::path out = opts.out_dir.empty() ? std::filesystem::path(cfg.output_dir) : opts.out_dir;
    std::filesystem::create_directories(out);
    return out;
}

void write_summary(const std::filesystem::path& dir, json summary) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / "summary.json");
    os << std::setw(2) << summary << '\n';
}

json failure_summary(const std::string& command, int code, const std::string& status,
                     const std::string& violated, const std::string& message) {
    return json{{"command", command},
                {"exit_code", code},
                {"status", status},
                {"violated", json::array({violated})},
                {"message", message}};
}

json invariants_json(const std::vector<InvariantCheck>& checks) {
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}});
    }
    return arr;
}

// Exit code and summary for a failure inside a time loop.
int step_failure_code(const StepFailure& e) {
    return e.kind() == FailureKind::linear_solve ? kExitNonConvergence : kExitInvariant;
}

std::string failure_name(FailureKind k) {
    switch (k) {
        case FailureKind::density_band: return "density_band";
        case FailureKind::pressure_range: return "pressure_range";
        case FailureKind::linear_solve: return "linear_solve";
        case FailureKind::departure: return "departure_in_domain";
        case FailureKind::singular_stress: return "stress_update_regular";
    }
    return "unknown";
}

// Wraps a command body with the exit-code policy shared by every command.
template <class Body>
int guarded_command(const std::string& command, const RunConfig& cfg, const CommandOptions& opts,
                    Body&& body) {
    std::filesystem::path dir;
    try {
        dir = output_dir(cfg, opts);
        cfg.validate();
        return body(dir);
    } catch (const ConfigError& e) {
        say(opts, std::string("error: ") + e.what());
        write_summary(dir.empty() ? std::filesystem::path(cfg.output_dir) : dir,
                      failure_summary(command, kExitConfig, "config_error", "config", e.what()));
        return kExitConfig;
    } catch (const StepFailure& e) {
        const int code = step_failure_code(e);
        say(opts, std::string("error: ") + e.what());
        write_summary(dir, failure_summary(command, code,
                                           code == kExitNonConvergence ? "non_convergence" : "invariant_violation",
                                           failure_name(e.kind()), e.what()));
        return code;
    } catch (const InvalidArgument& e) {
        say(opts, std::string("error: ") + e.what());
        write_summary(dir, failure_summary(command, kExitConfig, "config_error", "precondition", e.what()));
        return kExitConfig;
    }
}

bool symmetric_storage_ok(const std::vector<SymTensorField>& tau) {
    // Packed storage reconstructs tau_ij and tau_ji from one value.
    for (const auto& t : tau) {
        const int d = t.grid().dim();
        for (std::size_t n = 0; n < t.nodes(); ++n)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    if (t.at(i, j, n) != t.at(j, i, n)) return false;
    }
    return true;
}

}  // namespace

Problem build_problem(const RunConfig& cfg, int n_override) {
    const int n = n_override > 0 ? n_override : cfg.n;
    const double e = cfg.extent;
    GridPtr grid;
    try {
        grid = Grid::make(cfg.dim, {n, n, n}, {e, e, e});
    } catch (const InvalidArgument& err) {
        throw ConfigError(err.what());
    }
    FluidParams params = cfg.fluid();
    params.validate();
    const std::size_t steps = cfg.steps();
    VectorField u0 = velocity_preset(cfg.ic_velocity, grid, cfg.ic_velocity_amplitude);
    SymTensorField tau0 = stress_preset(cfg.ic_stress, u0, cfg.ic_stress_amplitude);
    ScalarField sigma0 = density_preset(cfg.ic_density, grid, cfg.ic_density_amplitude);
    ForcingHistory f = forcing_history(cfg.forcing, grid, cfg.forcing_amplitude, cfg.dt, steps, cfg.forcing_period);
    return Problem{grid, params, InitialData{std::move(u0), std::move(sigma0), std::move(tau0)}, std::move(f),
                   cfg.dt, steps};
}

bool RunReport::all_pass() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const InvariantCheck& c) { return c.pass; });
}

std::vector<std::string> RunReport::violated() const {
    std::vector<std::string> v;
    for (const auto& c : invariants)
        if (!c.pass) v.push_back(c.name);
    return v;
}

RunReport solve_and_check(const Problem& pb, const RunConfig& cfg) {
    RunReport rep;
    const FluidParams& p = pb.params;
    rep.budgets = size_budgets(pb.init, pb.forcing, pb.dt, pb.steps, p, cfg.sizing(), cfg.linear());
    if (cfg.B1 > 0.0) rep.budgets.B1 = cfg.B1;
    if (cfg.B2 > 0.0) rep.budgets.B2 = cfg.B2;

    IterateOptions o = cfg.iterate_options();
    o.B1 = rep.budgets.B1;
    o.B2 = rep.budgets.B2;
    rep.iteration = iterate(pb.init, pb.forcing, pb.dt, pb.steps, p, o);
    if (!rep.iteration.converged()) return rep;

    const IterTriple& sol = rep.iteration.solution;
    const VelocityTrajectory& vel = rep.iteration.diag.velocity;
    rep.membership = check_membership(sol, pb.init, rep.budgets.B1, rep.budgets.B2, p);
    rep.energy = check_energy_estimate(vel, p);
    rep.regularity = check_regularity_estimate(vel, p, cfg.linear());
    rep.dissipation = check_dissipation(vel, p);
    rep.density_bounds = check_density_bounds(sol.pi, sol.w, pb.dt, p);
    rep.stress_bounds = check_stress_bounds(sol.psi, sol.w, pb.dt, p, rep.density_bounds.C_omega);
    rep.residual = coupled_residual(sol, pb.forcing, p, cfg.map_options());

    auto& inv = rep.invariants;
    const double energy_limit = rep.energy.rhs * (1.0 + 10.0 * pb.dt);
    inv.push_back({"energy_estimate", rep.energy.lhs <= energy_limit, rep.energy.lhs, energy_limit});
    inv.push_back({"dissipation_inequality", rep.dissipation.holds, rep.dissipation.worst, 0.0});

    double band_min = std::numeric_limits<double>::infinity(), band_max = -band_min;
    double worst_mean = 0.0;
    bool mean_ok = true, dirichlet_ok = true;
    for (std::size_t n = 0; n < sol.w.size(); ++n) {
        const BandExtrema b = density_band(sol.pi[n], p);
        band_min = std::min(band_min, b.min);
        band_max = std::max(band_max, b.max);
        const double m = std::abs(mean(sol.pi[n]));
        worst_mean = std::max(worst_mean, m);
        if (m > 1e-12 * (1.0 + norm(sol.pi[n]))) mean_ok = false;
        if (!sol.w[n].satisfies_dirichlet()) dirichlet_ok = false;
    }
    inv.push_back({"density_band_low", band_min >= p.band_low(), band_min, p.band_low()});
    inv.push_back({"density_band_high", band_max <= p.band_high(), band_max, p.band_high()});
    inv.push_back({"sigma_mean_zero", mean_ok, worst_mean, 1e-12});
    inv.push_back({"tau_symmetric", symmetric_storage_ok(sol.psi), 0.0, 0.0});
    inv.push_back({"velocity_dirichlet", dirichlet_ok, 0.0, 0.0});
    const double res_limit = 10.0 * cfg.tol_fp;
    inv.push_back({"coupled_residual", rep.residual.max() <= res_limit, rep.residual.max(), res_limit});
    inv.push_back({"membership", rep.membership.pass, rep.membership.slack_min, 0.0});
    inv.push_back({"density_transport_bound", rep.density_bounds.holds, rep.density_bounds.sup_norm,
                   rep.density_bounds.bound});
    inv.push_back({"stress_transport_bound", rep.stress_bounds.holds, rep.stress_bounds.sup_norm,
                   rep.stress_bounds.bound});
    return rep;
}

void write_energy_ledger(std::ostream& os, const RunReport& r, const FluidParams& params) {
    os << "t,lhs_4_6,rhs_4_6,slack_4_6,c1_emp,lin_iters,lin_residual,mean_sigma_preproject,"
          "density_band_min,density_band_max,sup_tau_h2,fitted_C_omega\n";
    const IterTriple& sol = r.iteration.solution;
    const PicardDiagnostics& d = r.iteration.diag;
    double sup_tau = 0.0;
    os << std::setprecision(12);
    for (std::size_t n = 0; n < sol.w.size(); ++n) {
        const auto& e = r.energy.history[n];
        const auto& g = r.regularity.history[n];
        const double c1 = g.rhs > 0.0 ? g.lhs / g.rhs : 0.0;
        const int iters = n > 0 ? d.velocity_steps[n - 1].lin_iters : 0;
        const double res = n > 0 ? d.velocity_steps[n - 1].residual : 0.0;
        const double mpre = n > 0 ? d.mean_preproject[n - 1] : mean(sol.pi[0]);
        const BandExtrema b = density_band(sol.pi[n], params);
        sup_tau = std::max(sup_tau, r.stress_bounds.sup_h2_history[n]);
        os << e.t << ',' << e.lhs << ',' << e.rhs << ',' << (e.rhs - e.lhs) << ',' << c1 << ',' << iters
           << ',' << res << ',' << mpre << ',' << b.min << ',' << b.max << ',' << sup_tau << ','
           << r.density_bounds.running_C_omega[n] << '\n';
    }
}

void write_convergence_history(std::ostream& os, const IterationResult& it) {
    os << "iteration,distance,contraction_ratio,membership_slack_min,distance_w,distance_pi,distance_psi\n";
    os << std::setprecision(12);
    for (const auto& h : it.history) {
        os << h.iteration << ',' << h.distance.total() << ',' << h.contraction_ratio << ','
           << h.membership_slack_min << ',' << h.distance.w << ',' << h.distance.pi << ',' << h.distance.psi
           << '\n';
    }
}

int cli_run(const RunConfig& cfg, const CommandOptions& opts) {
    return guarded_command("run", cfg, opts, [&](const std::filesystem::path& dir) {
        const Problem pb = build_problem(cfg);
        require_initial_hypotheses(pb.init, pb.params);
        say(opts, "run: " + std::to_string(cfg.dim) + "D grid " + std::to_string(cfg.n) + ", " +
                      std::to_string(pb.steps) + " steps of dt = " + num(pb.dt));
        const RunReport rep = solve_and_check(pb, cfg);
        {
            std::ofstream os(dir / "convergence.csv");
            write_convergence_history(os, rep.iteration);
        }
        for (const auto& h : rep.iteration.history) {
            say(opts, "  iteration " + std::to_string(h.iteration) + "  distance " + num(h.distance.total()) +
                          "  ratio " + num(h.contraction_ratio));
        }
        json summary{{"command", "run"},
                     {"iterations", rep.iteration.history.size()},
                     {"monotone", rep.iteration.monotone()},
                     {"max_contraction_ratio", rep.iteration.max_ratio()},
                     {"B1", rep.budgets.B1},
                     {"B2", rep.budgets.B2},
                     {"C4", rep.budgets.C4},
                     {"T_star", rep.budgets.T_star},
                     {"T", pb.dt * static_cast<double>(pb.steps)}};
        if (!rep.iteration.converged()) {
            say(opts, "error: " + rep.iteration.message);
            summary["exit_code"] = kExitNonConvergence;
            summary["status"] = "non_convergence";
            summary["violated"] = json::array({"fixed_point_convergence"});
            summary["message"] = rep.iteration.message;
            write_summary(dir, summary);
            return static_cast<int>(kExitNonConvergence);
        }

        {
            std::ofstream os(dir / "energy_ledger.csv");
            write_energy_ledger(os, rep, pb.params);
        }
        if (cfg.snapshots) {
            const auto snap = dir / "snapshots";
            std::filesystem::create_directories(snap);
            const IterTriple& s = rep.iteration.solution;
            const double T = s.T();
            write_snapshot(snap / "u_initial.txt", s.w.front(), 0.0);
            write_snapshot(snap / "sigma_initial.txt", s.pi.front(), 0.0);
            write_snapshot(snap / "tau_initial.txt", s.psi.front(), 0.0);
            write_snapshot(snap / "u_final.txt", s.w.back(), T);
            write_snapshot(snap / "sigma_final.txt", s.pi.back(), T);
            write_snapshot(snap / "tau_final.txt", s.psi.back(), T);
        }

        const int code = rep.all_pass() ? kExitOk : kExitInvariant;
        summary["exit_code"] = code;
        summary["status"] = code == kExitOk ? "ok" : "invariant_violation";
        summary["violated"] = rep.violated();
        summary["invariants"] = invariants_json(rep.invariants);
        summary["energy_estimate"] = {{"lhs", rep.energy.lhs}, {"rhs", rep.energy.rhs}, {"slack", rep.energy.slack}};
        summary["regularity_estimate"] = {
            {"lhs", rep.regularity.lhs}, {"bracket", rep.regularity.rhs}, {"C1_emp", rep.regularity.ratio}};
        summary["dissipation_worst_relative_margin"] = rep.dissipation.worst;
        summary["density_bounds"] = {{"sup_h2", rep.density_bounds.sup_norm},
                                     {"sup_rate_h1", rep.density_bounds.sup_rate},
                                     {"w_l1_h3", rep.density_bounds.w_l1_h3},
                                     {"C_bound", rep.density_bounds.C_bound},
                                     {"C_rate", rep.density_bounds.C_rate},
                                     {"C_omega", rep.density_bounds.C_omega},
                                     {"initial_h2", rep.density_bounds.initial_h2},
                                     {"initial_l2", rep.density_bounds.initial_l2}};
        summary["stress_bounds"] = {{"sup_h2", rep.stress_bounds.sup_norm},
                                    {"bound", rep.stress_bounds.bound},
                                    {"C0", rep.stress_bounds.C0}};
        summary["membership"] = {{"velocity_usage", rep.membership.velocity_usage},
                                 {"state_usage", rep.membership.state_usage},
                                 {"rate_usage", rep.membership.rate_usage},
                                 {"slack_min", rep.membership.slack_min},
                                 {"violations", rep.membership.violations}};
        summary["coupled_residual"] = {
            {"u", rep.residual.u}, {"sigma", rep.residual.sigma}, {"tau", rep.residual.tau}};
        write_summary(dir, summary);

        say(opts, "  energy estimate: lhs " + num(rep.energy.lhs) + " <= rhs " + num(rep.energy.rhs));
        say(opts, "  C1_emp " + num(rep.regularity.ratio) + ", C_Omega " + num(rep.density_bounds.C_omega) +
                      ", C0 " + num(rep.stress_bounds.C0));
        say(opts, "  coupled residual " + num(rep.residual.max()));
        for (const auto& c : rep.invariants) {
            say(opts, std::string("  ") + (c.pass ? "PASS " : "FAIL ") + c.name);
        }
        return code;
    });
}

namespace {

struct PairedRun {
    int n = 0;
    IterTriple base;
    IterTriple perturbed;
    IterTriple regauged;  // identical data, different starting guess
};

IterTriple solve_or_throw(const Problem& pb, const RunConfig& cfg, const IterTriple* guess = nullptr) {
    IterationResult r = iterate(pb.init, pb.forcing, pb.dt, pb.steps, pb.params, cfg.iterate_options(), guess);
    if (!r.converged()) throw StepFailure(r.message, pb.steps, FailureKind::linear_solve);
    return std::move(r.solution);
}

PairedRun paired_run(const RunConfig& cfg, int n) {
    PairedRun out;
    out.n = n;
    Problem pb = build_problem(cfg, n);
    require_initial_hypotheses(pb.init, pb.params);
    out.base = solve_or_throw(pb, cfg);

    IterTriple guess = constant_extension(pb.init, pb.dt, pb.steps);
    guess.w = diffusion_trajectory(pb.init.u0, pb.dt, pb.steps, pb.params, cfg.linear());
    out.regauged = solve_or_throw(pb, cfg, &guess);

    if (cfg.uniqueness_amplitude == 0.0) {
        out.perturbed = out.base;
    } else {
        Problem pp = pb;
        pp.init.sigma0.add_scaled(density_preset("cosine-density", pb.grid, 1.0), cfg.uniqueness_amplitude);
        require_initial_hypotheses(pp.init, pp.params);
        out.perturbed = solve_or_throw(pp, cfg);
    }
    return out;
}

}  // namespace

int cli_uniqueness(const RunConfig& cfg, const CommandOptions& opts) {
    return guarded_command("uniqueness", cfg, opts, [&](const std::filesystem::path& dir) {
        const FluidParams p = cfg.fluid();
        const double limit = uniqueness_delta_limit(p);
        const double delta = cfg.uniqueness_delta > 0.0 ? cfg.uniqueness_delta : 0.5 * limit;
        if (!(delta < limit)) {
            throw ConfigError("uniqueness.delta = " + num(delta) + " is not below the positivity threshold " +
                              num(limit));
        }
        say(opts, "uniqueness: delta = " + num(delta) + " (threshold " + num(limit) + ")");

        std::vector<PairedRun> runs;
        if (opts.jobs > 1) {
            std::vector<std::future<PairedRun>> pending;
            for (int n : cfg.uniqueness_resolutions)
                pending.push_back(std::async(std::launch::async, paired_run, std::cref(cfg), n));
            for (auto& f : pending) runs.push_back(f.get());
        } else {
            for (int n : cfg.uniqueness_resolutions) runs.push_back(paired_run(cfg, n));
        }

        const double C12 = fit_C12(runs.front().base, runs.front().perturbed, delta, p);
        say(opts, "  fitted C12 = " + num(C12) + " on " + std::to_string(runs.front().n) + " cells");
        const double same_limit = std::pow(10.0 * cfg.tol_fp, 2);

        json per = json::array();
        bool ok = true;
        for (const PairedRun& r : runs) {
            const UniquenessReport u = uniqueness_experiment(r.base, r.perturbed, delta, C12, p, cfg.uniqueness_slack);
            const UniquenessReport same = uniqueness_experiment(r.base, r.regauged, delta, C12, p);
            const bool same_ok = same.e_final <= same_limit;
            ok = ok && u.envelope_holds && same_ok;
            std::ofstream os(dir / ("uniqueness_" + std::to_string(r.n) + ".csv"));
            os << "t,e,chi,envelope\n" << std::setprecision(12);
            for (const auto& row : u.rows) os << row.t << ',' << row.e << ',' << row.chi << ',' << row.envelope << '\n';
            say(opts, "  n = " + std::to_string(r.n) + ": e(0) = " + num(u.rows.front().e) + ", e(T) = " +
                          num(u.e_final) + ", max e/envelope = " + num(u.max_ratio) +
                          (u.envelope_holds ? "  envelope holds" : "  ENVELOPE VIOLATED"));
            say(opts, "           identical data, other guess: e(T) = " + num(same.e_final) + " (limit " +
                          num(same_limit) + ")" + (same_ok ? "" : "  FAIL"));
            per.push_back({{"n", r.n},
                           {"e0", u.rows.front().e},
                           {"eT", u.e_final},
                           {"max_ratio", u.max_ratio},
                           {"envelope_holds", u.envelope_holds},
                           {"identical_data_eT", same.e_final},
                           {"identical_data_ok", same_ok}});
        }
        const int code = ok ? kExitOk : kExitInvariant;
        json summary{{"command", "uniqueness"},
                     {"exit_code", code},
                     {"status", ok ? "ok" : "invariant_violation"},
                     {"violated", ok ? json::array() : json::array({"uniqueness_envelope"})},
                     {"delta", delta},
                     {"delta_limit", limit},
                     {"C12", C12},
                     {"slack", cfg.uniqueness_slack},
                     {"resolutions", per}};
        write_summary(dir, summary);
        return code;
    });
}

int cli_probe(const RunConfig& cfg, const CommandOptions& opts) {
    return guarded_command("probe", cfg, opts, [&](const std::filesystem::path& dir) {
        const Problem pb = build_problem(cfg);
        require_initial_hypotheses(pb.init, pb.params);
        const IterTriple base = solve_or_throw(pb, cfg);

        const VectorField v = velocity_preset("vortex", pb.grid, 1.0);
        Perturbation dir_all;
        const std::string& c = cfg.probe_component;
        if (c == "all" || c == "w") dir_all.w = v;
        if (c == "all" || c == "pi") dir_all.pi = density_preset("cosine-density", pb.grid, 1.0);
        if (c == "all" || c == "psi") dir_all.psi = stress_preset("proportional-stress", v, 1.0);
        const ProbeReport rep = continuity_probe(base, dir_all, cfg.probe_delta, pb.forcing, pb.params,
                                                 cfg.map_options(), cfg.probe_levels, cfg.probe_band);

        Perturbation psi_only;
        psi_only.psi = stress_preset("proportional-stress", v, 1.0);
        const ProbeReport decoupled = continuity_probe(base, psi_only, cfg.probe_delta, pb.forcing, pb.params,
                                                       cfg.map_options(), 2, cfg.probe_band);
        const double q = decoupled.levels.front().output.pi;

        std::ofstream os(dir / "probe.csv");
        os << "delta,distance,distance_w,distance_pi,distance_psi\n" << std::setprecision(12);
        json levels = json::array();
        for (const auto& l : rep.levels) {
            os << l.delta << ',' << l.output.total() << ',' << l.output.w << ',' << l.output.pi << ','
               << l.output.psi << '\n';
            levels.push_back({{"delta", l.delta}, {"distance", l.output.total()}});
            say(opts, "  delta " + num(l.delta) + "  output distance " + num(l.output.total()));
        }
        for (double r : rep.ratios) say(opts, "  ratio " + num(r));
        say(opts, "  psi-only perturbation: density output change " + num(q));

        const bool ok = rep.linear && q == 0.0;
        const int code = ok ? kExitOk : kExitInvariant;
        json violated = json::array();
        if (!rep.linear) violated.push_back("continuity_linear_shrinkage");
        if (q != 0.0) violated.push_back("density_ignores_psi");
        write_summary(dir, {{"command", "probe"},
                            {"exit_code", code},
                            {"status", ok ? "ok" : "invariant_violation"},
                            {"violated", violated},
                            {"levels", levels},
                            {"ratios", rep.ratios},
                            {"psi_only_density_change", q}});
        return code;
    });
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const CommandOptions& opts) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        if (opts.log) *opts.log << "error: " << e.what() << '\n';
        const auto dir = opts.out_dir.empty() ? std::filesystem::path(cfg.output_dir) : opts.out_dir;
        write_summary(dir, failure_summary(command, kExitConfig, "config_error", "config", e.what()));
        return kExitConfig;
    }
    if (command == "run") return cli_run(cfg, opts);
    if (command == "mms") return cli_mms(cfg, opts);
    if (command == "uniqueness") return cli_uniqueness(cfg, opts);
    if (command == "probe") return cli_probe(cfg, opts);
    if (opts.log) *opts.log << "error: unknown command '" << command << "'\n";
    return kExitConfig;
}

}  // namespace oldroyd
