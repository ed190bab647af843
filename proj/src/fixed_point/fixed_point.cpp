#include "oldroyd/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oldroyd/errors.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/operators.hpp"

namespace oldroyd {

IterTriple constant_extension(const InitialData& init, double dt, std::size_t steps) {
    IterTriple x;
    x.dt = dt;
    x.w.assign(steps + 1, init.u0);
    x.pi.assign(steps + 1, init.sigma0);
    x.psi.assign(steps + 1, init.tau0);
    return x;
}

void require_initial_hypotheses(const InitialData& init, const FluidParams& params) {
    if (!init.u0.satisfies_dirichlet()) {
        throw ConfigError("hypothesis violated: initial velocity u0 must vanish on the boundary");
    }
    const double m = mean(init.sigma0);
    if (std::abs(m) > 1e-12 * (1.0 + norm(init.sigma0))) {
        std::ostringstream msg;
        msg << "hypothesis violated: initial density remainder sigma0 must have zero mean (mean = " << m
            << ")";
        throw ConfigError(msg.str());
    }
    const double e2 = params.eps * params.eps;
    for (std::size_t n = 0; n < init.sigma0.nodes(); ++n) {
        const double rho = params.alpha + e2 * init.sigma0[n];
        if (!(rho >= params.m1 && rho <= params.M1)) {
            const auto x = init.sigma0.grid().position(n);
            std::ostringstream msg;
            msg << "hypothesis violated: initial density bounds m1 <= alpha + eps^2 sigma0 <= M1 ("
                << "density " << rho << " at x = (" << x[0] << ", " << x[1] << "), band [" << params.m1
                << ", " << params.M1 << "])";
            throw ConfigError(msg.str());
        }
    }
}

namespace {

void require_shapes(const IterTriple& x, const ForcingHistory& f, const char* context) {
    const std::size_t levels = x.w.size();
    if (levels == 0 || x.pi.size() != levels || x.psi.size() != levels || f.size() != levels) {
        throw InvalidArgument(std::string(context) +
                              ": trajectories and forcing need the same number of time levels");
    }
    if (levels > 1 && !(x.dt > 0.0)) throw InvalidArgument(std::string(context) + ": dt must be positive");
}

[[noreturn]] void rethrow_at(std::size_t step, const std::exception& e, FailureKind kind) {
    throw StepFailure("step " + std::to_string(step) + ": " + e.what(), step, kind);
}

// Runs the body of step `step` and tags solver failures with the step index.
template <class Body>
void guarded_step(std::size_t step, Body&& body) {
    try {
        body();
    } catch (const DensityBandViolation& e) {
        rethrow_at(step, e, FailureKind::density_band);
    } catch (const PressureRangeError& e) {
        rethrow_at(step, e, FailureKind::pressure_range);
    } catch (const LinearSolveError& e) {
        rethrow_at(step, e, FailureKind::linear_solve);
    } catch (const DepartureExcursion& e) {
        rethrow_at(step, e, FailureKind::departure);
    } catch (const SingularStressSystem& e) {
        rethrow_at(step, e, FailureKind::singular_stress);
    }
}

template <class F>
double diff_norm(const F& a, const F& b, int k = 0) {
    F d = a - b;
    return norm(d, k);
}

template <class F>
double rate_norm_sq(const F& a, const F& b, double dt, int k) {
    F d = b - a;
    d.scale(1.0 / dt);
    return norm_squared(d, k);
}

bool same_values(const Field& a, const Field& b) {
    auto av = a.values();
    auto bv = b.values();
    return av.size() == bv.size() && std::equal(av.begin(), av.end(), bv.begin());
}

double velocity_budget(const std::vector<VectorField>& w, double dt) {
    double sup2 = 0.0, int3 = 0.0, sup_d = 0.0, int_d1 = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        sup2 = std::max(sup2, norm_squared(w[n], 2));
        if (n == 0) continue;
        int3 += dt * norm_squared(w[n], 3);
        sup_d = std::max(sup_d, rate_norm_sq(w[n - 1], w[n], dt, 0));
        int_d1 += dt * rate_norm_sq(w[n - 1], w[n], dt, 1);
    }
    return sup2 + int3 + sup_d + int_d1;
}

}  // namespace

PicardResult picard_map(const IterTriple& x, const ForcingHistory& f, const FluidParams& params,
                        const MapOptions& opts) {
    require_shapes(x, f, "picard_map");
    const std::size_t N = x.steps();
    const double dt = x.dt;

    PicardResult out;
    IterTriple& y = out.next;
    PicardDiagnostics& diag = out.diag;
    y.dt = dt;
    y.w.reserve(N + 1);
    y.pi.reserve(N + 1);
    y.psi.reserve(N + 1);
    y.w.push_back(x.w[0]);
    y.pi.push_back(x.pi[0]);
    y.psi.push_back(x.psi[0]);

    diag.velocity.dt = dt;
    diag.velocity.u.push_back(x.w[0]);
    guarded_step(0, [&] {
        diag.velocity.forcing_initial = assemble_forcing(x.w[0], x.pi[0], x.psi[0], f[0], params);
    });

    for (std::size_t n = 0; n < N; ++n) {
        guarded_step(n + 1, [&] {
            const VectorField F = assemble_forcing(x.w[n + 1], x.pi[n + 1], x.psi[n + 1], f[n + 1], params);
            VelocityStep vs = step_velocity(y.w[n], F, dt, params, opts.lin);
            const CharacteristicMap map = trace(x.w[n + 1], dt);
            DensityStep ds = step_density(y.pi[n], x.w[n + 1], map, params);
            SymTensorField tau = step_stress(y.psi[n], x.w[n + 1], map, params, opts.stress_theta);

            diag.velocity.u.push_back(vs.u);
            diag.velocity.forcing.push_back(F);
            diag.velocity_steps.push_back(vs.report);
            diag.mean_preproject.push_back(ds.mean_preproject);
            diag.band.push_back(ds.band);
            diag.max_departure_clip = std::max(diag.max_departure_clip, map.max_excursion);
            y.w.push_back(std::move(vs.u));
            y.pi.push_back(std::move(ds.sigma));
            y.psi.push_back(std::move(tau));
        });
    }
    return out;
}

Distance distance(const IterTriple& a, const IterTriple& b, const FluidParams& params) {
    if (a.w.size() != b.w.size() || a.pi.size() != b.pi.size() || a.psi.size() != b.psi.size()) {
        throw InvalidArgument("distance: trajectories of different length");
    }
    Distance d;
    for (std::size_t n = 0; n < a.w.size(); ++n) {
        d.w = std::max(d.w, diff_norm(a.w[n], b.w[n]));
        d.pi = std::max(d.pi, diff_norm(a.pi[n], b.pi[n]));
        d.psi = std::max(d.psi, diff_norm(a.psi[n], b.psi[n]));
    }
    const double sa = std::sqrt(params.alpha);
    d.weighted = sa * d.w + params.eps / sa * d.pi + std::sqrt(params.We / (2.0 * params.omega)) * d.psi;
    return d;
}

MembershipReport check_membership(const IterTriple& x, const InitialData& init, double B1, double B2,
                                  const FluidParams& params) {
    if (x.w.empty()) throw InvalidArgument("check_membership: empty trajectory");
    MembershipReport rep;
    rep.B1 = B1;
    rep.B2 = B2;
    const double dt = x.dt;

    rep.velocity_usage = velocity_budget(x.w, dt);
    double sup_pi = 0.0, sup_psi = 0.0, sup_dpi = 0.0, sup_dpsi = 0.0;
    rep.band = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t n = 0; n < x.w.size(); ++n) {
        sup_pi = std::max(sup_pi, norm(x.pi[n], 2));
        sup_psi = std::max(sup_psi, norm(x.psi[n], 2));
        const BandExtrema b = density_band(x.pi[n], params);
        rep.band.min = std::min(rep.band.min, b.min);
        rep.band.max = std::max(rep.band.max, b.max);
        if (!x.w[n].satisfies_dirichlet()) {
            rep.violations.push_back("w does not vanish on the boundary at step " + std::to_string(n));
        }
        if (n == 0) continue;
        sup_dpi = std::max(sup_dpi, std::sqrt(rate_norm_sq(x.pi[n - 1], x.pi[n], dt, 1)));
        sup_dpsi = std::max(sup_dpsi, std::sqrt(rate_norm_sq(x.psi[n - 1], x.psi[n], dt, 1)));
    }
    rep.state_usage = sup_pi + sup_psi;
    rep.rate_usage = sup_dpi + sup_dpsi;

    if (!same_values(x.w[0], init.u0) || !same_values(x.pi[0], init.sigma0) ||
        !same_values(x.psi[0], init.tau0)) {
        rep.violations.push_back("trajectory does not start from the initial data");
    }

    const double low = params.band_low(), high = params.band_high();
    const double slacks[] = {
        (B1 - rep.velocity_usage) / B1,
        (B1 - rep.state_usage) / B1,
        (B2 - rep.rate_usage) / B2,
        (rep.band.min - low) / low,
        (high - rep.band.max) / high,
    };
    const char* names[] = {"velocity budget exceeds B1", "density/stress H2 budget exceeds B1",
                           "time-derivative budget exceeds B2", "density band: below m1/2",
                           "density band: above 2 M1"};
    rep.slack_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 5; ++i) {
        rep.slack_min = std::min(rep.slack_min, slacks[i]);
        if (!(slacks[i] >= 0.0)) rep.violations.push_back(names[i]);
    }
    rep.pass = rep.violations.empty();
    return rep;
}

std::vector<VectorField> diffusion_trajectory(const VectorField& u0, double dt, std::size_t steps,
                                              const FluidParams& params, const LinearSolveOptions& lin) {
    FluidParams unit = params;
    unit.alpha = 1.0;
    const VectorField zero(u0.grid_ptr());
    std::vector<VectorField> w{u0};
    w.reserve(steps + 1);
    for (std::size_t n = 0; n < steps; ++n) w.push_back(step_velocity(w.back(), zero, dt, unit, lin).u);
    return w;
}

BudgetSizing size_budgets(const InitialData& init, const ForcingHistory& f, double dt,
                          std::size_t steps, const FluidParams& params, const SizingConstants& k,
                          const LinearSolveOptions& lin) {
    if (f.size() != steps + 1) throw InvalidArgument("size_budgets: forcing needs steps + 1 levels");
    BudgetSizing s;
    s.norm_Au0 = norm(op_A(init.u0));
    const double Au2 = s.norm_Au0 * s.norm_Au0;
    if (Au2 > 0.0) s.C4 = velocity_budget(diffusion_trajectory(init.u0, dt, steps, params, lin), dt) / Au2;
    s.w_lipschitz = params.pressure.remainder_lipschitz(params);

    const double s2 = norm(init.sigma0, 2), t2 = norm(init.tau0, 2);
    const double s1 = norm(init.sigma0, 1), t1 = norm(init.tau0, 1);
    const double relax = 2.0 * params.omega / (k.C3 * params.We);
    double f_h1 = 0.0, df_hm1 = 0.0;
    for (std::size_t n = 0; n < steps; ++n) {
        f_h1 += dt * norm_squared(f[n + 1], 1);
        VectorField d = f[n + 1] - f[n];
        d.scale(1.0 / dt);
        const double h = h_minus1_norm(d, lin);
        df_hm1 += dt * h * h;
    }
    const double wl2 = s.w_lipschitz * s.w_lipschitz;
    const double e = std::exp(std::sqrt(2.0));
    const double a = s.C4 * Au2;
    const double b = e * (s2 + t2 + 1.0 + relax);
    const double c = k.C2 * (2.0 * k.C5 + 1.0) * Au2 + k.C5 * Au2 * Au2 +
                     3.0 * (2.0 * (1.0 + wl2) * s1 * s1 + t1 * t1) + 3.0 * norm_squared(f[0]) +
                     3.0 * f_h1 + 3.0 * df_hm1;
    s.B1 = k.margin * std::max({a, b, c});
    s.B2 = k.margin * e * (k.C6 * (s2 + t2 + 1.0 + relax) + (t2 + relax) / params.We);
    s.T_star = std::min(s.B1 / (2.0 * k.C2 * (4.0 * s.C4 * (1.0 + wl2) * s.B1 * s.B1 + 3.0 * s.B2 * s.B2)),
                        2.0 / (k.C6 * k.C6 * s.B1));
    return s;
}

bool IterationResult::monotone() const noexcept {
    for (std::size_t k = 1; k < history.size(); ++k) {
        if (history[k].distance.total() > history[k - 1].distance.total()) return false;
    }
    return true;
}

double IterationResult::max_ratio() const noexcept {
    double r = 0.0;
    for (std::size_t k = 1; k < history.size(); ++k) r = std::max(r, history[k].contraction_ratio);
    return r;
}

IterationResult iterate(const InitialData& init, const ForcingHistory& f, double dt,
                        std::size_t steps, const FluidParams& params, const IterateOptions& opts,
                        const IterTriple* guess) {
    require_initial_hypotheses(init, params);
    IterTriple x = guess ? *guess : constant_extension(init, dt, steps);
    if (x.steps() != steps || !same_values(x.w[0], init.u0) || !same_values(x.pi[0], init.sigma0) ||
        !same_values(x.psi[0], init.tau0)) {
        throw InvalidArgument("iterate: initial guess must start from the initial data");
    }

    IterationResult res;
    double prev = 0.0;
    for (int k = 1; k <= opts.max_iter; ++k) {
        PicardResult pr = picard_map(x, f, params, opts.map);
        IterationRecord rec;
        rec.iteration = k;
        rec.distance = distance(pr.next, x, params);
        const double d = rec.distance.total();
        rec.contraction_ratio = (k > 1 && prev > 0.0) ? d / prev : 0.0;
        if (opts.B1 > 0.0 && opts.B2 > 0.0) {
            const MembershipReport m = check_membership(pr.next, init, opts.B1, opts.B2, params);
            rec.membership_slack_min = m.slack_min;
            rec.membership_pass = m.pass;
        }
        res.history.push_back(rec);
        x = std::move(pr.next);
        res.diag = std::move(pr.diag);
        prev = d;
        if (d < opts.tol_fp) {
            res.status = IterationStatus::converged;
            break;
        }
    }
    res.solution = std::move(x);
    if (!res.converged()) {
        std::ostringstream msg;
        msg << "fixed-point iteration did not reach tol " << opts.tol_fp << " within " << opts.max_iter
            << " iterations (last distance " << prev << "); try a shorter time window T";
        res.message = msg.str();
    }
    return res;
}

double CoupledResidual::max() const noexcept { return std::max({u, sigma, tau}); }

CoupledResidual coupled_residual(const IterTriple& x, const ForcingHistory& f,
                                 const FluidParams& params, const MapOptions& opts) {
    require_shapes(x, f, "coupled_residual");
    CoupledResidual r;
    for (std::size_t n = 0; n < x.steps(); ++n) {
        guarded_step(n + 1, [&] {
            const VectorField F = assemble_forcing(x.w[n + 1], x.pi[n + 1], x.psi[n + 1], f[n + 1], params);
            const VectorField u = step_velocity(x.w[n], F, x.dt, params, opts.lin).u;
            const CharacteristicMap map = trace(x.w[n + 1], x.dt);
            const ScalarField s = step_density(x.pi[n], x.w[n + 1], map, params).sigma;
            const SymTensorField t = step_stress(x.psi[n], x.w[n + 1], map, params, opts.stress_theta);
            r.u = std::max(r.u, diff_norm(x.w[n + 1], u));
            r.sigma = std::max(r.sigma, diff_norm(x.pi[n + 1], s));
            r.tau = std::max(r.tau, diff_norm(x.psi[n + 1], t));
        });
    }
    return r;
}

IterTriple perturb(const IterTriple& base, const Perturbation& p, double delta) {
    if (p.w && !p.w->satisfies_dirichlet()) {
        throw InvalidArgument("perturb: velocity direction must vanish on the boundary");
    }
    IterTriple x = base;
    const std::size_t N = base.steps();
    for (std::size_t n = 1; n <= N; ++n) {
        const double s = delta * static_cast<double>(n) / static_cast<double>(N);
        if (p.w) x.w[n].add_scaled(*p.w, s);
        if (p.pi) x.pi[n].add_scaled(*p.pi, s);
        if (p.psi) x.psi[n].add_scaled(*p.psi, s);
    }
    return x;
}

ProbeReport continuity_probe(const IterTriple& base, const Perturbation& direction, double delta,
                             const ForcingHistory& f, const FluidParams& params, const MapOptions& opts,
                             int levels, double band) {
    const IterTriple k0 = picard_map(base, f, params, opts).next;
    ProbeReport rep;
    double d = delta;
    for (int l = 0; l < levels; ++l, d *= 0.5) {
        const IterTriple k1 = picard_map(perturb(base, direction, d), f, params, opts).next;
        rep.levels.push_back({d, distance(k1, k0, params)});
    }
    for (std::size_t l = 0; l + 1 < rep.levels.size(); ++l) {
        const double a = rep.levels[l].output.total();
        const double b = rep.levels[l + 1].output.total();
        if (a == 0.0 && b == 0.0) continue;
        const double r = a / b;
        rep.ratios.push_back(r);
        if (!(r >= 2.0 / band && r <= 2.0 * band)) rep.linear = false;
    }
    return rep;
}

double uniqueness_delta_limit(const FluidParams& params) {
    const double e2 = params.eps * params.eps;
    const double a = params.alpha, om = params.omega;
    return std::min(4.0 * a * om * (1.0 - om) / (10.0 * e2 * om + a * params.We), a * (1.0 - om) / e2);
}

namespace {

// Per-level norms entering e(t) and X_delta(t).
struct UniquenessData {
    double dt = 0.0;
    std::vector<double> e;
    std::vector<double> linear;     // ||u1|| + ||u2|| + ||u1||_3
    std::vector<double> quadratic;  // ||u1||_2^3 + ||s1||_2^2 + 2 ||s2||_2^2 + ||t1||_2^2
};

UniquenessData uniqueness_data(const IterTriple& a, const IterTriple& b, const FluidParams& params) {
    if (a.w.size() != b.w.size() || a.w.empty() || a.dt != b.dt) {
        throw InvalidArgument("uniqueness_experiment: solutions on different windows");
    }
    const double e2 = params.eps * params.eps;
    UniquenessData d;
    d.dt = a.dt;
    for (std::size_t n = 0; n < a.w.size(); ++n) {
        const double du = diff_norm(a.w[n], b.w[n]);
        const double ds = diff_norm(a.pi[n], b.pi[n]);
        const double dtau = diff_norm(a.psi[n], b.psi[n]);
        d.e.push_back(params.alpha * du * du + e2 / params.alpha * ds * ds +
                      params.We / (2.0 * params.omega) * dtau * dtau);
        d.linear.push_back(norm(a.w[n]) + norm(b.w[n]) + norm(a.w[n], 3));
        const double u2 = norm(a.w[n], 2);
        d.quadratic.push_back(u2 * u2 * u2 + norm_squared(a.pi[n], 2) + 2.0 * norm_squared(b.pi[n], 2) +
                              norm_squared(a.psi[n], 2));
    }
    return d;
}

std::vector<UniquenessRow> envelope_rows(const UniquenessData& d, double delta, double C12) {
    std::vector<UniquenessRow> rows;
    double integral = 0.0;
    for (std::size_t n = 0; n < d.e.size(); ++n) {
        UniquenessRow r;
        r.t = d.dt * static_cast<double>(n);
        r.e = d.e[n];
        r.chi = C12 * d.linear[n] + C12 * C12 / (2.0 * delta) * d.quadratic[n];
        r.envelope = d.e[0] * std::exp(2.0 * integral);
        integral += d.dt * r.chi;
        rows.push_back(r);
    }
    return rows;
}

bool envelope_ok(const std::vector<UniquenessRow>& rows, double slack) {
    for (const auto& r : rows) {
        if (r.e > r.envelope * slack) return false;
    }
    return true;
}

void require_delta(double delta, const FluidParams& params) {
    const double limit = uniqueness_delta_limit(params);
    if (!(delta > 0.0 && delta < limit)) {
        std::ostringstream msg;
        msg << "delta = " << delta << " must lie in (0, " << limit
            << ") so that both dissipation coefficients of the difference energy stay positive";
        throw InvalidArgument(msg.str());
    }
}

}  // namespace

UniquenessReport uniqueness_experiment(const IterTriple& sol1, const IterTriple& sol2, double delta,
                                       double C12, const FluidParams& params, double slack) {
    require_delta(delta, params);
    const UniquenessData d = uniqueness_data(sol1, sol2, params);
    UniquenessReport rep;
    rep.delta = delta;
    rep.C12 = C12;
    rep.slack = slack;
    rep.rows = envelope_rows(d, delta, C12);
    rep.e_final = d.e.back();
    if (d.e[0] > 0.0) {
        for (const auto& r : rep.rows) rep.max_ratio = std::max(rep.max_ratio, r.e / r.envelope);
        rep.envelope_holds = envelope_ok(rep.rows, slack);
    } else {
        // Identical data: the envelope is zero and only e == 0 satisfies it.
        rep.envelope_holds = std::all_of(rep.rows.begin(), rep.rows.end(),
                                         [](const UniquenessRow& r) { return r.e == 0.0; });
    }
    return rep;
}

double fit_C12(const IterTriple& sol1, const IterTriple& sol2, double delta, const FluidParams& params) {
    require_delta(delta, params);
    const UniquenessData d = uniqueness_data(sol1, sol2, params);
    if (d.e[0] == 0.0) return 0.0;
    auto ok = [&](double C) { return envelope_ok(envelope_rows(d, delta, C), 1.0); };
    if (ok(0.0)) return 0.0;
    double hi = 1e-6;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 1e12) throw Error("fit_C12: no finite constant satisfies the envelope");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace oldroyd
