#include "oldroyd/velocity_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oldroyd/errors.hpp"
#include "oldroyd/linear_solver.hpp"
#include "oldroyd/norms.hpp"
#include "oldroyd/operators.hpp"

namespace oldroyd {

VelocityStep step_velocity(const VectorField& u_prev, const VectorField& F_rhs, double dt,
                           const FluidParams& params, const LinearSolveOptions& opts) {
    if (!u_prev.satisfies_dirichlet()) {
        throw InvalidArgument("step_velocity: previous velocity is not a Dirichlet field");
    }
    if (!(dt > 0.0)) throw InvalidArgument("step_velocity: dt must be positive");
    u_prev.require_compatible(F_rhs, "step_velocity");

    const Grid& grid = u_prev.grid();
    const double alpha = params.alpha;
    const double c = dt * (1.0 - params.omega);
    const auto& mask = grid.boundary_mask();
    const std::size_t nn = grid.node_count();

    VectorField rhs(u_prev.grid_ptr());
    auto rv = rhs.values();
    auto up = u_prev.values();
    auto fv = F_rhs.values();
    for (std::size_t i = 0; i < rv.size(); ++i) {
        rv[i] = mask[i % nn] ? 0.0 : alpha * up[i] + dt * fv[i];
    }

    // Boundary rows reduce to alpha x = 0.
    const LinearOperator apply = [&grid, alpha, c](std::span<const double> x, std::span<double> y) {
        apply_A_interior(grid, x, y);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = alpha * x[i] + c * y[i];
    };

    VelocityStep out{u_prev, {}};
    const CgResult cg = conjugate_gradient(apply, rv, out.u.values(), opts.tol, opts.max_iter);
    if (!cg.converged) {
        throw LinearSolveError("velocity solve did not reach tolerance " + std::to_string(opts.tol),
                               cg.iterations, cg.relative_residual);
    }
    out.u.enforce_dirichlet();

    auto& rep = out.report;
    rep.lin_iters = cg.iterations;
    rep.residual = cg.relative_residual;
    rep.dt = dt;
    rep.norm_u = norm(out.u);
    rep.norm_du = norm(out.u - u_prev) / dt;
    rep.norm_Au = norm(op_A(out.u));
    return out;
}

double h_minus1_norm(const Field& g, const LinearSolveOptions& opts) {
    const Grid& grid = g.grid();
    const auto& mask = grid.boundary_mask();
    const auto& w = grid.weights();
    const LinearOperator apply = [&grid, &mask](std::span<const double> x, std::span<double> y) {
        apply_neg_laplacian_interior(grid, x, y);
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (mask[i]) y[i] = x[i];
        }
    };
    double s = 0.0;
    std::vector<double> rhs(grid.node_count()), phi(grid.node_count());
    for (int c = 0; c < g.components(); ++c) {
        auto gc = g.component(c);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = mask[i] ? 0.0 : gc[i];
        std::fill(phi.begin(), phi.end(), 0.0);
        const CgResult cg = conjugate_gradient(apply, rhs, phi, opts.tol, opts.max_iter);
        if (!cg.converged) {
            throw LinearSolveError("H^-1 Laplacian solve did not converge", cg.iterations,
                                   cg.relative_residual);
        }
        double sc = 0.0;
        for (std::size_t i = 0; i < rhs.size(); ++i) sc += w[i] * rhs[i] * phi[i];
        s += g.multiplicity(c) * sc;
    }
    return std::sqrt(std::max(s, 0.0));
}

namespace {

void require_trajectory(const VelocityTrajectory& traj, const char* context) {
    if (traj.u.empty()) throw InvalidArgument(std::string(context) + ": empty trajectory");
    if (traj.forcing.size() + 1 != traj.u.size()) {
        throw InvalidArgument(std::string(context) + ": need one forcing field per step");
    }
    if (traj.u.size() > 1 && !(traj.dt > 0.0)) {
        throw InvalidArgument(std::string(context) + ": dt must be positive");
    }
}

void finish(EstimateReport& rep) {
    rep.slack = rep.rhs - rep.lhs;
    rep.vacuous = rep.lhs == 0.0 && rep.rhs == 0.0;
    rep.ratio = rep.vacuous ? 0.0 : rep.lhs / rep.rhs;
}

double du_squared(const VectorField& a, const VectorField& b, double dt, int k) {
    VectorField d = b - a;
    d.scale(1.0 / dt);
    return norm_squared(d, k);
}

}  // namespace

EstimateReport check_energy_estimate(const VelocityTrajectory& traj, const FluidParams& params) {
    require_trajectory(traj, "check_energy_estimate");
    const double om = 1.0 - params.omega;
    const double dt = traj.dt;
    auto dissipation = [](const VectorField& u) {
        return norm_squared(rate_tensors(u).D) + norm_squared(divergence(u));
    };

    EstimateReport rep;
    double int_du = 0.0, int_Au = 0.0, int_F = 0.0;
    double sup_diss = dissipation(traj.u[0]);
    const double rhs0 = 4.0 * om * norm_squared(rate_tensors(traj.u[0]).D);
    rep.history.push_back({0.0, om * sup_diss, rhs0});
    for (std::size_t n = 0; n + 1 < traj.u.size(); ++n) {
        const VectorField& u1 = traj.u[n + 1];
        int_du += dt * du_squared(traj.u[n], u1, dt, 0);
        int_Au += dt * norm_squared(op_A(u1));
        int_F += dt * norm_squared(traj.forcing[n]);
        sup_diss = std::max(sup_diss, dissipation(u1));
        const double lhs = 0.5 * params.alpha * int_du + 0.5 * om * om * int_Au + om * sup_diss;
        rep.history.push_back({(n + 1) * dt, lhs, rhs0 + int_F});
    }
    rep.lhs = rep.history.back().lhs;
    rep.rhs = rep.history.back().rhs;
    finish(rep);
    return rep;
}

EstimateReport check_regularity_estimate(const VelocityTrajectory& traj, const FluidParams& params,
                                         const LinearSolveOptions& opts) {
    (void)params;
    require_trajectory(traj, "check_regularity_estimate");
    const double dt = traj.dt;
    const VectorField& F0 = traj.forcing_initial ? *traj.forcing_initial
                            : traj.forcing.empty()  ? VectorField(traj.u[0].grid_ptr())
                                                    : traj.forcing[0];

    const double bracket0 = norm_squared(op_A(traj.u[0])) + norm_squared(F0);
    double int_u3 = 0.0, int_du1 = 0.0, int_F1 = 0.0, int_dF = 0.0;
    double sup_u2 = norm_squared(traj.u[0], 2);
    double sup_du0 = 0.0;

    EstimateReport rep;
    rep.history.push_back({0.0, sup_u2, bracket0});
    for (std::size_t n = 0; n + 1 < traj.u.size(); ++n) {
        const VectorField& u1 = traj.u[n + 1];
        int_u3 += dt * norm_squared(u1, 3);
        sup_u2 = std::max(sup_u2, norm_squared(u1, 2));
        int_du1 += dt * du_squared(traj.u[n], u1, dt, 1);
        sup_du0 = std::max(sup_du0, du_squared(traj.u[n], u1, dt, 0));
        int_F1 += dt * norm_squared(traj.forcing[n], 1);
        VectorField dF = traj.forcing[n] - (n == 0 ? F0 : traj.forcing[n - 1]);
        dF.scale(1.0 / dt);
        const double hm1 = h_minus1_norm(dF, opts);
        int_dF += dt * hm1 * hm1;
        rep.history.push_back(
            {(n + 1) * dt, int_u3 + sup_u2 + int_du1 + sup_du0, bracket0 + int_F1 + int_dF});
    }
    rep.lhs = rep.history.back().lhs;
    rep.rhs = rep.history.back().rhs;
    finish(rep);
    return rep;
}

DissipationReport check_dissipation(const VelocityTrajectory& traj, const FluidParams& params) {
    require_trajectory(traj, "check_dissipation");
    const double dt = traj.dt;
    const double alpha = params.alpha;
    const double om = 1.0 - params.omega;
    const Grid& grid = traj.u[0].grid();
    const auto& mask = grid.boundary_mask();
    const std::size_t nn = grid.node_count();

    DissipationReport rep;
    rep.worst = 0.0;
    bool first = true;
    std::vector<double> Au(traj.u[0].values().size());
    for (std::size_t n = 0; n + 1 < traj.u.size(); ++n) {
        const VectorField& u0 = traj.u[n];
        const VectorField& u1 = traj.u[n + 1];
        const VectorField& F = traj.forcing[n];

        // Residual of the step's linear system, interior rows only.
        VectorField r(u1.grid_ptr());
        apply_A_interior(grid, u1.values(), Au);
        auto rv = r.values();
        auto a0 = u0.values();
        auto a1 = u1.values();
        auto fv = F.values();
        for (std::size_t i = 0; i < rv.size(); ++i) {
            rv[i] = mask[i % nn] ? 0.0
                                 : alpha * a0[i] + dt * fv[i] - alpha * a1[i] - dt * om * Au[i];
        }

        const double lhs = alpha * (norm_squared(u1) - norm_squared(u0)) / (2.0 * dt) +
                           om * inner(op_A(u1), u1);
        const double rhs = inner(F, u1) + std::abs(inner(r, u1)) / dt;
        const double margin = rhs - lhs;
        const double scale = std::abs(lhs) + std::abs(rhs) + 1e-300;
        rep.margin.push_back(margin);
        const double rel = margin / scale;
        if (first || rel < rep.worst) rep.worst = rel;
        first = false;
        if (rel < -1e-10) rep.holds = false;
    }
    return rep;
}

}  // namespace oldroyd
