#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "oldroyd/errors.hpp"
#include "oldroyd/harness.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/operators.hpp"
#include "oldroyd/presets.hpp"

namespace oldroyd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRoundoff = 1e-13;

// Evaluates fn on every item, at most `jobs` at a time. Results keep the input order.
template <class T, class Fn>
auto parallel_map(const std::vector<T>& items, int jobs, Fn fn) {
    using R = decltype(fn(items.front()));
    std::vector<R> out;
    out.reserve(items.size());
    if (jobs <= 1) {
        for (const T& it : items) out.push_back(fn(it));
        return out;
    }
    for (std::size_t start = 0; start < items.size(); start += static_cast<std::size_t>(jobs)) {
        std::vector<std::future<R>> batch;
        const std::size_t stop = std::min(items.size(), start + static_cast<std::size_t>(jobs));
        for (std::size_t i = start; i < stop; ++i)
            batch.push_back(std::async(std::launch::async, fn, items[i]));
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

void fill_orders(OrderStudy& s) {
    for (std::size_t i = 1; i < s.rows.size(); ++i) {
        const double a = s.rows[i - 1].error, b = s.rows[i].error;
        const double r = static_cast<double>(s.rows[i].resolution) / s.rows[i - 1].resolution;
        s.rows[i].order = (a > 0.0 && b > 0.0) ? std::log(a / b) / std::log(r) : 0.0;
    }
    s.exact = std::all_of(s.rows.begin(), s.rows.end(), [](const OrderRow& r) { return r.error <= kRoundoff; });
    s.pass = s.exact || s.min_order() >= s.required;
}

GridPtr unit_grid(int n) { return Grid::make(2, {n, n, n}, {1.0, 1.0, 1.0}); }

// Analytic -lap of the unit vortex; the vortex is divergence free, so this is A v.
VectorField vortex_A(const GridPtr& g) {
    VectorField out(g);
    for (std::size_t n = 0; n < g->node_count(); ++n) {
        const auto p = g->position(n);
        const double x = p[0], y = p[1];
        const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
        const double lap1 = 2 * kPi * kPi * std::cos(2 * kPi * x) * std::sin(2 * kPi * y) -
                            4 * kPi * kPi * sx * sx * std::sin(2 * kPi * y);
        const double lap2 = 4 * kPi * kPi * std::sin(2 * kPi * x) * sy * sy -
                            2 * kPi * kPi * std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
        out(0, n) = -lap1;
        out(1, n) = -lap2;
    }
    out.enforce_dirichlet();
    return out;
}

// Exact solution u*(t) = exp(-t) v of alpha u' + (1 - omega) A u = F.
// `discrete_A` builds F from A_h v instead of the analytic operator.
double velocity_mms_error(int n, std::size_t steps, double T, const FluidParams& params,
                          const LinearSolveOptions& lin, bool discrete_A) {
    const GridPtr g = unit_grid(n);
    const VectorField v = velocity_preset("vortex", g, 1.0);
    const VectorField Av = discrete_A ? op_A(v) : vortex_A(g);
    const double dt = T / static_cast<double>(steps);
    const double c = 1.0 - params.omega;
    VectorField u = v;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double e = std::exp(-dt * static_cast<double>(k));
        VectorField F(g);
        F.add_scaled(v, -params.alpha * e);
        F.add_scaled(Av, c * e);
        F.enforce_dirichlet();
        u = step_velocity(u, F, dt, params, lin).u;
    }
    VectorField exact = v;
    exact.scale(std::exp(-T));
    return norm(u - exact);
}

std::size_t transport_steps(int n, int n0) { return static_cast<std::size_t>(4 * n / n0); }

// Injects the fine field onto the coarse nodes (every second node).
template <FieldType F>
F inject(const F& fine, const GridPtr& coarse) {
    F out(coarse);
    const Grid& fg = fine.grid();
    for (std::size_t n = 0; n < coarse->node_count(); ++n) {
        const auto m = coarse->multi_index(n);
        const std::size_t fn = fg.index(2 * m[0], 2 * m[1], 2 * m[2]);
        for (int c = 0; c < out.components(); ++c) out(c, n) = fine(c, fn);
    }
    return out;
}

struct TransportRun {
    ScalarField sigma;
    SymTensorField tau;
    double max_mean_drift = 0.0;
};

// Vortex-driven density and stress transport to time T with dt proportional to h.
TransportRun transport_run(int n, int n0, double T, const FluidParams& params, bool density,
                           double theta = 0.5) {
    const GridPtr g = unit_grid(n);
    const VectorField w = velocity_preset("vortex", g, 1.0);
    const std::size_t steps = transport_steps(n, n0);
    const double dt = T / static_cast<double>(steps);
    TransportRun r{density_preset("cosine-density", g, 1.0), stress_preset("proportional-stress", w, 1.0)};
    const CharacteristicMap map = trace(w, dt);
    for (std::size_t k = 0; k < steps; ++k) {
        if (density) {
            DensityStep s = step_density(r.sigma, w, map, params);
            r.max_mean_drift = std::max(r.max_mean_drift, std::abs(s.mean_preproject));
            r.sigma = std::move(s.sigma);
        } else {
            r.tau = step_stress(r.tau, w, map, params, theta);
        }
    }
    return r;
}

std::vector<int> with_finer(std::vector<int> res) {
    res.push_back(2 * res.back());
    return res;
}

}  // namespace

double OrderStudy::min_order() const {
    if (rows.size() < 2) return 0.0;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i) m = std::min(m, rows[i].order);
    return m;
}

OrderStudy mms_velocity_space(const RunConfig& cfg, int jobs) {
    OrderStudy s{"velocity_space", {}, 1.8};
    const FluidParams p = cfg.fluid();
    const int n0 = cfg.mms_resolutions.front();
    const auto errors = parallel_map(cfg.mms_resolutions, jobs, [&](int n) {
        const std::size_t steps = static_cast<std::size_t>(4 * (n / n0) * (n / n0));
        return velocity_mms_error(n, steps, cfg.mms_T, p, cfg.linear(), false);
    });
    for (std::size_t i = 0; i < errors.size(); ++i) s.rows.push_back({cfg.mms_resolutions[i], errors[i]});
    fill_orders(s);
    return s;
}

OrderStudy mms_velocity_time(const RunConfig& cfg, int jobs) {
    OrderStudy s{"velocity_time", {}, 0.9};
    const FluidParams p = cfg.fluid();
    const std::vector<int> steps{4, 8, 16};
    const double T = 10.0 * cfg.mms_T;
    const auto errors = parallel_map(steps, jobs, [&](int k) {
        return velocity_mms_error(cfg.mms_resolutions.front(), static_cast<std::size_t>(k), T, p, cfg.linear(),
                                  true);
    });
    for (std::size_t i = 0; i < errors.size(); ++i) s.rows.push_back({steps[i], errors[i]});
    fill_orders(s);
    return s;
}

OrderStudy mms_transport_still(const RunConfig& cfg) {
    OrderStudy s{"transport_still", {}, 0.9};
    const FluidParams p = cfg.fluid();
    for (int n : cfg.mms_resolutions) {
        const GridPtr g = unit_grid(n);
        const VectorField w(g);
        VectorField wd = w;
        wd.enforce_dirichlet();
        const ScalarField sigma0 = density_preset("cosine-density", g, 1.0);
        const SymTensorField tau0 = stress_preset("proportional-stress", velocity_preset("vortex", g, 1.0), 1.0);
        ScalarField sigma = sigma0;
        const std::size_t steps = 10;
        const double dt = cfg.mms_T / static_cast<double>(steps);
        for (std::size_t k = 0; k < steps; ++k) sigma = step_density(sigma, wd, dt, p).sigma;
        // With w = 0 the stress obeys tau' = -tau / We exactly; compare to the
        // discrete relaxation factor so only the transport part is measured.
        SymTensorField tau = tau0;
        const double theta = cfg.stress_theta;
        const double q = (1.0 - (1.0 - theta) * dt / p.We) / (1.0 + theta * dt / p.We);
        for (std::size_t k = 0; k < steps; ++k) tau = step_stress(tau, wd, dt, p, theta);
        SymTensorField tau_ref = tau0;
        tau_ref.scale(std::pow(q, static_cast<double>(steps)));
        const double e = std::max(max_abs(sigma - sigma0), max_abs(tau - tau_ref) / (1.0 + max_abs(tau0)));
        s.rows.push_back({n, e});
    }
    fill_orders(s);
    return s;
}

OrderStudy mms_density_self(const RunConfig& cfg, int jobs) {
    OrderStudy s{"density_self", {}, 0.9};
    const FluidParams p = cfg.fluid();
    const std::vector<int> res = with_finer(cfg.mms_resolutions);
    const int n0 = res.front();
    const auto runs = parallel_map(res, jobs, [&](int n) { return transport_run(n, n0, cfg.mms_T, p, true); });
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        const ScalarField fine = inject(runs[i + 1].sigma, runs[i].sigma.grid_ptr());
        s.rows.push_back({res[i], norm(runs[i].sigma - fine)});
    }
    fill_orders(s);
    return s;
}

OrderStudy mms_density_mean_drift(const RunConfig& cfg, int jobs) {
    OrderStudy s{"density_mean_drift", {}, 0.9};
    const FluidParams p = cfg.fluid();
    const int n0 = cfg.mms_resolutions.front();
    const auto runs = parallel_map(cfg.mms_resolutions, jobs,
                                   [&](int n) { return transport_run(n, n0, cfg.mms_T, p, true); });
    for (std::size_t i = 0; i < runs.size(); ++i) s.rows.push_back({cfg.mms_resolutions[i], runs[i].max_mean_drift});
    fill_orders(s);
    return s;
}

OrderStudy mms_stress_self(const RunConfig& cfg, int jobs) {
    OrderStudy s{"stress_self", {}, 0.9};
    const FluidParams p = cfg.fluid();
    const std::vector<int> res = with_finer(cfg.mms_resolutions);
    const int n0 = res.front();
    const auto runs = parallel_map(
        res, jobs, [&](int n) { return transport_run(n, n0, cfg.mms_T, p, false, cfg.stress_theta); });
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        const SymTensorField fine = inject(runs[i + 1].tau, runs[i].tau.grid_ptr());
        s.rows.push_back({res[i], norm(runs[i].tau - fine)});
    }
    fill_orders(s);
    return s;
}

OrderStudy mms_stress_relaxation(const RunConfig& cfg, double theta) {
    char name[48];
    std::snprintf(name, sizeof name, "stress_relaxation_theta_%g", theta);
    OrderStudy s{name, {}, theta == 0.5 ? 1.8 : 0.9};
    const FluidParams p = cfg.fluid();
    const GridPtr g = unit_grid(cfg.mms_resolutions.front());
    VectorField w(g);
    w.enforce_dirichlet();
    const SymTensorField tau0 = stress_preset("proportional-stress", velocity_preset("vortex", g, 1.0), 1.0);
    const double T = p.We;
    SymTensorField exact = tau0;
    exact.scale(std::exp(-T / p.We));
    for (int steps : {10, 20, 40}) {
        const double dt = T / steps;
        SymTensorField tau = tau0;
        for (int k = 0; k < steps; ++k) tau = step_stress(tau, w, dt, p, theta);
        s.rows.push_back({steps, norm(tau - exact) / norm(tau0)});
    }
    fill_orders(s);
    return s;
}

int cli_mms(const RunConfig& cfg, const CommandOptions& opts) {
    std::filesystem::path dir = opts.out_dir.empty() ? std::filesystem::path(cfg.output_dir) : opts.out_dir;
    std::filesystem::create_directories(dir);
    auto summary = [&](int code, const std::string& status, nlohmann::json violated, nlohmann::json extra) {
        nlohmann::json j{{"command", "mms"}, {"exit_code", code}, {"status", status}, {"violated", violated}};
        j.update(extra);
        std::ofstream os(dir / "summary.json");
        os << std::setw(2) << j << '\n';
    };
    try {
        cfg.validate();
        if (cfg.mms_resolutions.size() < 3) throw ConfigError("mms.resolutions needs at least three grids");
        for (std::size_t i = 1; i < cfg.mms_resolutions.size(); ++i)
            if (cfg.mms_resolutions[i] != 2 * cfg.mms_resolutions[i - 1])
                throw ConfigError("mms.resolutions must be dyadic (each twice the previous)");
        const int jobs = std::max(1, opts.jobs);
        std::vector<OrderStudy> studies;
        studies.push_back(mms_velocity_space(cfg, jobs));
        studies.push_back(mms_velocity_time(cfg, jobs));
        studies.push_back(mms_transport_still(cfg));
        studies.push_back(mms_density_self(cfg, jobs));
        studies.push_back(mms_density_mean_drift(cfg, jobs));
        studies.push_back(mms_stress_self(cfg, jobs));
        studies.push_back(mms_stress_relaxation(cfg, 1.0));
        studies.push_back(mms_stress_relaxation(cfg, 0.5));

        std::ofstream csv(dir / "mms.csv");
        csv << "study,resolution,error,order\n" << std::setprecision(12);
        nlohmann::json violated = nlohmann::json::array(), table = nlohmann::json::array();
        for (const OrderStudy& s : studies) {
            if (opts.log) *opts.log << s.name << "  (required order " << s.required << ")\n";
            for (const OrderRow& r : s.rows) {
                csv << s.name << ',' << r.resolution << ',' << r.error << ',';
                char line[96];
                if (s.exact) {
                    csv << "exact\n";
                    std::snprintf(line, sizeof line, "  %6d  %12.4e  exact", r.resolution, r.error);
                } else {
                    csv << r.order << '\n';
                    std::snprintf(line, sizeof line, "  %6d  %12.4e  %6.3f", r.resolution, r.error, r.order);
                }
                if (opts.log) *opts.log << line << '\n';
            }
            if (opts.log) *opts.log << (s.pass ? "  PASS\n" : "  FAIL\n");
            if (!s.pass) violated.push_back(s.name);
            table.push_back({{"study", s.name},
                             {"min_order", s.exact ? nlohmann::json("exact") : nlohmann::json(s.min_order())},
                             {"required", s.required},
                             {"pass", s.pass}});
        }
        const int code = violated.empty() ? kExitOk : kExitInvariant;
        summary(code, code == kExitOk ? "ok" : "invariant_violation", violated, {{"studies", table}});
        return code;
    } catch (const ConfigError& e) {
        if (opts.log) *opts.log << "error: " << e.what() << '\n';
        summary(kExitConfig, "config_error", {"config"}, {{"message", e.what()}});
        return kExitConfig;
    } catch (const StepFailure& e) {
        if (opts.log) *opts.log << "error: " << e.what() << '\n';
        summary(kExitInvariant, "invariant_violation", {"step"}, {{"message", e.what()}});
        return kExitInvariant;
    } catch (const LinearSolveError& e) {
        if (opts.log) *opts.log << "error: " << e.what() << '\n';
        summary(kExitNonConvergence, "non_convergence", {"linear_solve"}, {{"message", e.what()}});
        return kExitNonConvergence;
    } catch (const Error& e) {
        if (opts.log) *opts.log << "error: " << e.what() << '\n';
        summary(kExitInvariant, "invariant_violation", {"solver"}, {{"message", e.what()}});
        return kExitInvariant;
    }
}

}  // namespace oldroyd
