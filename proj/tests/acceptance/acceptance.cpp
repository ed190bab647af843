// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oldroyd/config.hpp"
#include "oldroyd/harness.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/operators.hpp"
#include "oldroyd/presets.hpp"
#include "oldroyd/rheology.hpp"
#include "oldroyd/transport.hpp"

using namespace oldroyd;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances and wall-clock limits.
constexpr double kMinOrder = 1.8;
constexpr double kIdentityTol = 0.02;
constexpr double kDecayTol = 1e-3;
constexpr double kMeanTol = 1e-12;
constexpr double kStillTol = 1e-12;  // relative drift of sigma over the whole run
constexpr double kContraction = 0.9;
constexpr std::size_t kMaxIterations = 20;
constexpr double kResidualTol = 1e-7;
constexpr double kProbeBand = 1.5;
constexpr double kEnvelopeSlack = 1.05;
constexpr double kConstantDrift = 0.30;

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path source(const std::string& rel) { return fs::path(OLDROYD_SOURCE_DIR) / rel; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "oldroyd_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string fmt(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", x);
    return b;
}

// Test fields on the unit square and their derivatives by hand.
//   f = sin(pi x) cos(2 pi y)
//   v = (sin(pi x) sin(pi y), sin(2 pi x) sin(pi y))        vanishes on the boundary
//   t = [[cos(pi x) cos(pi y), sin(pi x) sin(2 pi y)],
//        [.,                  cos(2 pi x) sin(pi y)]]
struct Fields {
    ScalarField f;
    VectorField v;
    SymTensorField t;
};

Fields make_fields(const GridPtr& g) {
    Fields F{ScalarField(g), VectorField(g), SymTensorField(g)};
    for (std::size_t n = 0; n < g->node_count(); ++n) {
        const auto p = g->position(n);
        const double x = p[0], y = p[1];
        F.f[n] = std::sin(kPi * x) * std::cos(2 * kPi * y);
        F.v(0, n) = std::sin(kPi * x) * std::sin(kPi * y);
        F.v(1, n) = std::sin(2 * kPi * x) * std::sin(kPi * y);
        F.t.at(0, 0, n) = std::cos(kPi * x) * std::cos(kPi * y);
        F.t.at(0, 1, n) = std::sin(kPi * x) * std::sin(2 * kPi * y);
        F.t.at(1, 1, n) = std::cos(2 * kPi * x) * std::sin(kPi * y);
    }
    F.v.enforce_dirichlet();
    return F;
}

// Discrete L2 errors of every operator against its analytic value on one grid.
std::vector<std::pair<std::string, double>> operator_errors(int cells) {
    const auto g = Grid::unit(2, cells);
    const Fields F = make_fields(g);
    const double p2 = kPi * kPi;

    VectorField grad_f(g), lap_v(g), A_v(g), div_t(g);
    ScalarField lap_f(g), div_v(g);
    TensorField grad_v(g);
    SymTensorField D_v(g);
    for (std::size_t n = 0; n < g->node_count(); ++n) {
        const auto p = g->position(n);
        const double x = p[0], y = p[1];
        const double sx = std::sin(kPi * x), cx = std::cos(kPi * x), sy = std::sin(kPi * y), cy = std::cos(kPi * y);
        const double s2x = std::sin(2 * kPi * x), c2x = std::cos(2 * kPi * x);
        const double s2y = std::sin(2 * kPi * y), c2y = std::cos(2 * kPi * y);

        grad_f(0, n) = kPi * cx * c2y;
        grad_f(1, n) = -2 * kPi * sx * s2y;
        lap_f[n] = -5 * p2 * sx * c2y;

        const double ax = kPi * cx * sy, ay = kPi * sx * cy;
        const double bx = 2 * kPi * c2x * sy, by = kPi * s2x * cy;
        grad_v.at(0, 0, n) = ax;
        grad_v.at(0, 1, n) = ay;
        grad_v.at(1, 0, n) = bx;
        grad_v.at(1, 1, n) = by;
        D_v.at(0, 0, n) = ax;
        D_v.at(0, 1, n) = 0.5 * (ay + bx);
        D_v.at(1, 1, n) = by;
        div_v[n] = ax + by;
        lap_v(0, n) = -2 * p2 * sx * sy;
        lap_v(1, n) = -5 * p2 * s2x * sy;
        const double ddx_div = -p2 * sx * sy + 2 * p2 * c2x * cy;
        const double ddy_div = p2 * cx * cy - p2 * s2x * sy;
        A_v(0, n) = -lap_v(0, n) - ddx_div;
        A_v(1, n) = -lap_v(1, n) - ddy_div;

        div_t(0, n) = -kPi * sx * cy + 2 * kPi * sx * c2y;
        div_t(1, n) = kPi * cx * s2y + kPi * c2x * cy;
    }

    return {
        {"grad f", norm(gradient(F.f) - grad_f)},
        {"lap f", norm(laplacian(F.f) - lap_f)},
        {"grad v", norm(gradient(F.v) - grad_v)},
        {"div v", norm(divergence(F.v) - div_v)},
        {"D v", norm(rate_tensors(F.v).D - D_v)},
        {"lap v", norm(laplacian(F.v) - lap_v)},
        {"A v", norm(op_A(F.v) - A_v)},
        {"div t", norm(div_tensor(F.t) - div_t)},
    };
}

Outcome criterion_operators() {
    const auto coarse = operator_errors(32), fine = operator_errors(64);
    double worst = 1e300;
    std::string which;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const double order = std::log2(coarse[i].second / fine[i].second);
        if (order < worst) {
            worst = order;
            which = coarse[i].first;
        }
    }
    double identity = 0.0;
    for (int n : {32, 64}) {
        const auto g = Grid::unit(2, n);
        const VectorField v = make_fields(g).v;
        const double lhs = inner(op_A(v), v);
        const double rhs = norm_squared(gradient(v)) + norm_squared(divergence(v));
        identity = std::max(identity, std::abs(lhs / rhs - 1.0));
    }
    return {worst >= kMinOrder && identity <= kIdentityTol,
            "min order " + fmt(worst) + " (" + which + ") >= " + fmt(kMinOrder) + ", A identity error " +
                fmt(identity) + " <= " + fmt(kIdentityTol)};
}

VectorField still(const GridPtr& g) {
    VectorField w(g);
    w.enforce_dirichlet();
    return w;
}

Outcome criterion_decay() {
    const auto g = Grid::unit(2, 16);
    FluidParams p;
    p.We = 0.5;
    const double dt = 1e-3;
    const SymTensorField tau0 = stress_preset("proportional-stress", velocity_preset("vortex", g, 1.0), 1.0);
    const VectorField w = still(g);
    SymTensorField tau = tau0;
    for (int n = 0; n < 1000; ++n) tau = step_stress(tau, w, dt, p);
    const double ratio = norm(tau) / norm(tau0);
    const double rel = std::abs(ratio / std::exp(-2.0) - 1.0);
    return {rel <= kDecayTol, "|tau(1)|/|tau0| = " + fmt(ratio) + ", relative error " + fmt(rel) + " <= " + fmt(kDecayTol)};
}

Outcome criterion_still_density() {
    const auto g = Grid::unit(2, 32);
    const FluidParams p;
    const ScalarField s0 = density_preset("cosine-density", g, 1.0);
    const VectorField w = still(g);
    ScalarField s = s0;
    double worst_mean = std::abs(mean(s0));
    for (int n = 0; n < 100; ++n) {
        s = step_density(s, w, 1e-3, p).sigma;
        worst_mean = std::max(worst_mean, std::abs(mean(s)));
    }
    const double drift = max_abs(s - s0) / max_abs(s0);
    return {drift <= kStillTol && worst_mean <= kMeanTol,
            "max |sigma(T) - sigma0| / max |sigma0| = " + fmt(drift) + ", max |mean sigma| = " + fmt(worst_mean)};
}

struct Solved {
    RunConfig cfg;
    Problem problem;
    RunReport report;
};

Solved solve_small(int n) {
    RunConfig cfg = load_config(source("configs/smalldata2d.cfg"));
    cfg.n = n;
    Problem pb = build_problem(cfg);
    RunReport rep = solve_and_check(pb, cfg);
    return {cfg, std::move(pb), std::move(rep)};
}

Outcome criterion_energy(const Solved& s) {
    const RunReport& r = s.report;
    if (!r.iteration.converged()) return {false, "fixed point did not converge"};
    const double limit = r.energy.rhs * (1 + 10 * s.cfg.dt);
    return {r.energy.lhs <= limit && r.dissipation.holds,
            "lhs " + fmt(r.energy.lhs) + " <= " + fmt(limit) + ", dissipation " +
                (r.dissipation.holds ? "holds" : "fails") + " at every step"};
}

Outcome criterion_convergence(const Solved& s) {
    const IterationResult& it = s.report.iteration;
    if (!it.converged()) return {false, "fixed point did not converge: " + it.message};
    const FluidParams& p = s.problem.params;
    bool band = true, centred = true, symmetric = true;
    for (std::size_t n = 0; n < it.solution.pi.size(); ++n) {
        const BandExtrema b = density_band(it.solution.pi[n], p);
        band = band && b.min >= 0.5 * p.m1 && b.max <= 2 * p.M1;
        centred = centred && std::abs(mean(it.solution.pi[n])) <= kMeanTol;
        const SymTensorField& t = it.solution.psi[n];
        symmetric = symmetric && t.components() == sym_components(t.grid().dim());
    }
    const double res = s.report.residual.max();
    const bool ok = it.monotone() && it.max_ratio() < kContraction && it.history.size() <= kMaxIterations &&
                    res < kResidualTol && band && centred && symmetric;
    return {ok, std::to_string(it.history.size()) + " iterations, " + (it.monotone() ? "monotone" : "not monotone") +
                    ", max ratio " + fmt(it.max_ratio()) + ", residual " + fmt(res) + ", band " +
                    (band ? "ok" : "violated") + ", mean " + (centred ? "ok" : "nonzero") + ", symmetric " +
                    (symmetric ? "ok" : "broken")};
}

Outcome criterion_probe() {
    const fs::path dir = scratch("probe");
    CommandOptions o;
    o.out_dir = dir;
    const RunConfig cfg = load_config(source("configs/probe.cfg"));
    if (cli_probe(cfg, o) != kExitOk) return {false, "probe command failed"};
    std::ifstream in(dir / "summary.json");
    const json s = json::parse(in);
    bool ok = s["ratios"].size() >= 2;
    std::string list;
    for (double r : s["ratios"]) {
        ok = ok && r >= 2.0 / kProbeBand && r <= 2.0 * kProbeBand;
        list += (list.empty() ? "" : " ") + fmt(r);
    }
    ok = ok && s["psi_only_density_change"].get<double>() == 0.0;
    return {ok, "halving ratios " + list + " within [" + fmt(2 / kProbeBand) + ", " + fmt(2 * kProbeBand) + "]"};
}

Outcome criterion_uniqueness() {
    const fs::path dir = scratch("uniqueness");
    CommandOptions o;
    o.out_dir = dir;
    RunConfig cfg = load_config(source("configs/uniqueness.cfg"));
    cfg.uniqueness_slack = kEnvelopeSlack;
    cfg.uniqueness_resolutions = {32, 64};
    const int code = cli_uniqueness(cfg, o);
    std::ifstream in(dir / "summary.json");
    const json s = json::parse(in);
    if (code != kExitOk && !s.contains("resolutions")) return {false, "uniqueness command failed: " + s.value("message", "")};
    const double same_tol = std::pow(10 * cfg.tol_fp, 2);
    bool ok = s["resolutions"].size() == 2;
    double worst_same = 0.0, worst_ratio = 0.0;
    for (const auto& r : s["resolutions"]) {
        worst_same = std::max(worst_same, r["identical_data_eT"].get<double>());
        std::ifstream csv(dir / ("uniqueness_" + std::to_string(r["n"].get<int>()) + ".csv"));
        std::string line;
        std::getline(csv, line);
        while (std::getline(csv, line)) {
            double t, e, chi, env;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &e, &chi, &env) != 4) return {false, "bad csv row"};
            worst_ratio = std::max(worst_ratio, e / env);
        }
    }
    ok = ok && worst_same <= same_tol && worst_ratio <= kEnvelopeSlack;
    return {ok, "C12 = " + fmt(s["C12"].get<double>()) + " fixed on 32 and 64, max e/envelope " + fmt(worst_ratio) +
                    " <= " + fmt(kEnvelopeSlack) + ", identical-data e(T) " + fmt(worst_same) + " <= " + fmt(same_tol)};
}

Outcome criterion_constants(const Solved& a, const Solved& b) {
    if (!a.report.iteration.converged() || !b.report.iteration.converged()) return {false, "a run did not converge"};
    auto drift = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x), std::abs(y)); };
    const double c1a = a.report.regularity.ratio, c1b = b.report.regularity.ratio;
    const double coa = a.report.density_bounds.C_omega, cob = b.report.density_bounds.C_omega;
    const double d1 = drift(c1a, c1b), d2 = drift(coa, cob);
    return {d1 < kConstantDrift && d2 < kConstantDrift,
            "C1_emp " + fmt(c1a) + " -> " + fmt(c1b) + " (" + fmt(100 * d1) + "%), C_Omega " + fmt(coa) + " -> " +
                fmt(cob) + " (" + fmt(100 * d2) + "%), limit " + fmt(100 * kConstantDrift) + "%"};
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;
    int failures = 0;
    auto report = [&](int id, double limit_s, const std::function<Outcome()>& body) {
        const auto t0 = clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        const bool pass = o.pass && secs < limit_s;
        if (!pass) ++failures;
        std::printf("criterion %d: %s  %s; %.2f s (limit %.0f s)\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                    limit_s);
        std::fflush(stdout);
    };

    report(1, 10, criterion_operators);
    report(2, 10, criterion_decay);
    report(3, 5, criterion_still_density);

    // Criteria 4 and 5 share the small-data solve on 32 x 32.
    std::optional<Solved> s32;
    double solve_secs = 0.0;
    auto small = [&]() -> const Solved& {
        if (!s32) {
            const auto t0 = clock::now();
            s32 = solve_small(32);
            solve_secs = std::chrono::duration<double>(clock::now() - t0).count();
        }
        return *s32;
    };
    report(4, 60, [&] { return criterion_energy(small()); });
    report(5, 300 - solve_secs, [&] { return criterion_convergence(small()); });
    report(6, 300, criterion_probe);
    report(7, 300, criterion_uniqueness);
    report(8, 600 - solve_secs, [&] { return criterion_constants(small(), solve_small(64)); });

    std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
