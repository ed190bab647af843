#pragma once

#include <optional>
#include <vector>

#include "oldroyd/field.hpp"
#include "oldroyd/params.hpp"

namespace oldroyd {

struct LinearSolveOptions {
    double tol = 1e-10;  // relative residual
    int max_iter = 5000;
};

struct VelocityStepReport {
    int lin_iters = 0;
    double residual = 0.0;  // relative residual of the final linear solve
    double dt = 0.0;
    double norm_u = 0.0;
    double norm_du = 0.0;  // ||(u - u_prev) / dt||
    double norm_Au = 0.0;
};

struct VelocityStep {
    VectorField u;
    VelocityStepReport report;
};

// One backward Euler step of alpha u' + (1 - omega) A u = F with u = 0 on the
// boundary: solves (alpha I + dt (1 - omega) A_h) u = alpha u_prev + dt F on
// interior nodes by conjugate gradients. Throws LinearSolveError when the
// solve stalls before `opts.tol`.
VelocityStep step_velocity(const VectorField& u_prev, const VectorField& F_rhs, double dt,
                           const FluidParams& params, const LinearSolveOptions& opts = {});

// Discrete H^{-1} norm: sqrt(<g, phi>) with -lap_h phi = g, phi = 0 on the
// boundary, one Dirichlet Laplacian solve per component.
double h_minus1_norm(const Field& g, const LinearSolveOptions& opts = {});

// ============================================================================
// Estimate monitors
// ============================================================================

// u[0..N] at t_n = n dt; forcing[n] is the right side that drove step n -> n+1.
struct VelocityTrajectory {
    double dt = 0.0;
    std::vector<VectorField> u;
    std::vector<VectorField> forcing;
    // Right side assembled from initial data at t = 0.
    std::optional<VectorField> forcing_initial;
};

struct EstimateRow {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct EstimateReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
    double ratio = 0.0;  // lhs / rhs, 0 when vacuous
    bool vacuous = false;  // rhs == 0 and lhs == 0
    std::vector<EstimateRow> history;  // running sides after each step

    bool holds(double factor = 1.0) const { return lhs <= rhs * factor; }
};

// Energy estimate of the parabolic velocity problem:
//   alpha/2 ||u'||^2_{L2L2} + (1-omega)^2/2 ||A u||^2_{L2L2}
//     + (1-omega) sup_t (||D u||^2 + ||div u||^2)
//   <= 4 (1-omega) ||D u0||^2 + ||F||^2_{L2L2}.
EstimateReport check_energy_estimate(const VelocityTrajectory& traj, const FluidParams& params);

// Higher-regularity estimate. lhs collects
//   ||u||^2_{L2H3} + ||u||^2_{LinfH2} + ||u'||^2_{L2H1} + ||u'||^2_{LinfL2},
// rhs the bracket ||A u0||^2 + ||F(0)||^2 + ||F||^2_{L2H1} + ||F'||^2_{L2H-1};
// `ratio` is the empirical stability constant C1. F' is the backward
// difference of the forcing sequence starting from forcing_initial.
EstimateReport check_regularity_estimate(const VelocityTrajectory& traj, const FluidParams& params,
                                         const LinearSolveOptions& opts = {});

// Per-step backward Euler dissipation inequality
//   alpha (||u1||^2 - ||u0||^2) / (2 dt) + (1-omega) <A u1, u1>
//     <= <F, u1> + |<r, u1>| / dt,
// r being the linear-solve residual of that step.
struct DissipationReport {
    std::vector<double> margin;  // rhs - lhs per step, >= -roundoff when it holds
    double worst = 0.0;          // min over steps of margin / scale
    bool holds = true;
};
DissipationReport check_dissipation(const VelocityTrajectory& traj, const FluidParams& params);

}  // namespace oldroyd
