#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oldroyd/field.hpp"
#include "oldroyd/params.hpp"
#include "oldroyd/rheology.hpp"
#include "oldroyd/transport.hpp"
#include "oldroyd/velocity_solver.hpp"

namespace oldroyd {

// Trajectories (w, pi, psi) at t_n = n dt, n = 0..N. Both the argument and the
// value of the Picard map; a converged value is a discrete solution (u, sigma, tau).
struct IterTriple {
    double dt = 0.0;
    std::vector<VectorField> w;
    std::vector<ScalarField> pi;
    std::vector<SymTensorField> psi;

    std::size_t steps() const noexcept { return w.empty() ? 0 : w.size() - 1; }
    double T() const noexcept { return dt * static_cast<double>(steps()); }
};

struct InitialData {
    VectorField u0;
    ScalarField sigma0;
    SymTensorField tau0;
};

// Body force sampled at every time level, f[0..N].
using ForcingHistory = std::vector<VectorField>;

// Constant-in-time extension of the initial data over N steps.
IterTriple constant_extension(const InitialData& init, double dt, std::size_t steps);

// Hypotheses on the initial data: u0 Dirichlet, sigma0 of zero mean
// and m1 <= alpha + eps^2 sigma0 <= M1. Throws ConfigError naming the first
// violated hypothesis.
void require_initial_hypotheses(const InitialData& init, const FluidParams& params);

struct MapOptions {
    LinearSolveOptions lin;
    double stress_theta = 0.5;
};

// Everything one application of the map produced besides the new triple.
struct PicardDiagnostics {
    VelocityTrajectory velocity;  // u and assembled right sides, for the estimate monitors
    std::vector<VelocityStepReport> velocity_steps;
    std::vector<double> mean_preproject;  // per step
    std::vector<BandExtrema> band;        // per step
    double max_departure_clip = 0.0;
};

struct PicardResult {
    IterTriple next;
    PicardDiagnostics diag;
};

// The map K: solves the velocity problem with the right side assembled from
// (w, pi, psi), and the density and stress transport problems driven by w.
// Step n -> n+1 freezes the coefficient data at level n+1. The output starts
// from the input's values at t = 0. Failures are rethrown as StepFailure.
PicardResult picard_map(const IterTriple& x, const ForcingHistory& f, const FluidParams& params,
                        const MapOptions& opts = {});

// Y_T distance: sup_n ||a_n - b_n|| per component, combined with the weights
// of the difference energy alpha |u|^2 + eps^2/alpha |sigma|^2 + We/(2 omega) |tau|^2:
//   total = sqrt(alpha) d_w + eps/sqrt(alpha) d_pi + sqrt(We/(2 omega)) d_psi.
// Any positive weights give an equivalent norm on the product space; these
// keep the density component, whose coupling carries a factor eps^-2, on the
// same footing as the velocity.
struct Distance {
    double w = 0.0;    // unweighted sup_n ||.||
    double pi = 0.0;
    double psi = 0.0;
    double weighted = 0.0;
    double total() const noexcept { return weighted; }
};
Distance distance(const IterTriple& a, const IterTriple& b, const FluidParams& params);

// ============================================================================
// Membership in the invariant set
// ============================================================================

struct MembershipReport {
    double B1 = 0.0;
    double B2 = 0.0;
    double velocity_usage = 0.0;  // ||w||^2_{Linf H2} + ||w||^2_{L2 H3} + ||w'||^2_{Linf L2} + ||w'||^2_{L2 H1}
    double state_usage = 0.0;     // ||pi||_{Linf H2} + ||psi||_{Linf H2}
    double rate_usage = 0.0;      // ||pi'||_{Linf H1} + ||psi'||_{Linf H1}
    BandExtrema band;
    double slack_min = 0.0;  // smallest relative slack over all inequalities
    bool pass = true;
    std::vector<std::string> violations;
};

MembershipReport check_membership(const IterTriple& x, const InitialData& init, double B1, double B2,
                                  const FluidParams& params);

// Undetermined constants of the budget sizing; all default to one.
struct SizingConstants {
    double C2 = 1.0;
    double C3 = 1.0;
    double C5 = 1.0;
    double C6 = 1.0;
    double margin = 1.01;  // the sizing inequalities are strict
};

struct BudgetSizing {
    double B1 = 0.0;
    double B2 = 0.0;
    double C4 = 0.0;       // fitted from the pure-diffusion trajectory
    double norm_Au0 = 0.0;
    double w_lipschitz = 0.0;  // ||w||_C, the remainder's Lipschitz constant on the band
    double T_star = 0.0;
};

// B1, B2 from initial-data and forcing norms following the structure of the
// existence proof. C4 is the ratio of the velocity budget used by the
// pure-diffusion trajectory w' + (1 - omega) A w = 0, w(0) = u0, to ||A u0||^2.
BudgetSizing size_budgets(const InitialData& init, const ForcingHistory& f, double dt,
                          std::size_t steps, const FluidParams& params,
                          const SizingConstants& k = {}, const LinearSolveOptions& lin = {});

// Pure-diffusion trajectory w' + (1 - omega) A w = 0 from u0.
std::vector<VectorField> diffusion_trajectory(const VectorField& u0, double dt, std::size_t steps,
                                              const FluidParams& params,
                                              const LinearSolveOptions& lin = {});

// ============================================================================
// Iteration
// ============================================================================

struct IterationRecord {
    int iteration = 0;
    Distance distance;
    double contraction_ratio = 0.0;  // distance / previous distance; 0 on the first
    double membership_slack_min = 0.0;
    bool membership_pass = true;
};

enum class IterationStatus { converged, max_iter_exceeded };

struct IterateOptions {
    MapOptions map;
    double tol_fp = 1e-8;
    int max_iter = 50;
    // Budgets for the per-iterate membership check; <= 0 skips it.
    double B1 = 0.0;
    double B2 = 0.0;
};

struct IterationResult {
    IterationStatus status = IterationStatus::max_iter_exceeded;
    IterTriple solution;
    PicardDiagnostics diag;  // from the last map application
    std::vector<IterationRecord> history;
    std::string message;

    bool converged() const noexcept { return status == IterationStatus::converged; }
    // Distances never increased.
    bool monotone() const noexcept;
    double max_ratio() const noexcept;
};

// Successive substitution x_{k+1} = K(x_k) until the Y_T distance drops below
// tol_fp. `guess` defaults to the constant extension of the initial data.
IterationResult iterate(const InitialData& init, const ForcingHistory& f, double dt,
                        std::size_t steps, const FluidParams& params, const IterateOptions& opts,
                        const IterTriple* guess = nullptr);

// Per-equation defect of a candidate solution: sup over steps of
// ||x_{n+1} - Step(x_n; data at n+1)|| for u, sigma and tau separately.
struct CoupledResidual {
    double u = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    double max() const noexcept;
};
CoupledResidual coupled_residual(const IterTriple& x, const ForcingHistory& f,
                                 const FluidParams& params, const MapOptions& opts = {});

// ============================================================================
// Continuity of the map
// ============================================================================

struct ProbeLevel {
    double delta = 0.0;
    Distance output;  // Y_T distance between K(base + delta p) and K(base)
};

struct ProbeReport {
    std::vector<ProbeLevel> levels;  // delta, delta/2, delta/4, ...
    std::vector<double> ratios;      // output(delta_k) / output(delta_{k+1})
    bool linear = true;              // every ratio within a factor `band` of 2
};

// Perturbation direction; applied with weight t/T so the initial data stay fixed.
struct Perturbation {
    std::optional<VectorField> w;
    std::optional<ScalarField> pi;
    std::optional<SymTensorField> psi;
};

IterTriple perturb(const IterTriple& base, const Perturbation& p, double delta);

ProbeReport continuity_probe(const IterTriple& base, const Perturbation& direction, double delta,
                             const ForcingHistory& f, const FluidParams& params,
                             const MapOptions& opts = {}, int levels = 3, double band = 1.5);

// ============================================================================
// Uniqueness
// ============================================================================

// Largest admissible delta: positivity of both dissipation coefficients of the
// difference energy inequality.
double uniqueness_delta_limit(const FluidParams& params);

struct UniquenessRow {
    double t = 0.0;
    double e = 0.0;
    double chi = 0.0;       // X_delta(t)
    double envelope = 0.0;  // e(0) exp(2 int_0^t X_delta), left Riemann sum
};

struct UniquenessReport {
    double delta = 0.0;
    double C12 = 0.0;
    double slack = 1.0;
    std::vector<UniquenessRow> rows;
    double max_ratio = 0.0;  // max_t e / envelope (0 when e(0) = 0)
    bool envelope_holds = true;
    double e_final = 0.0;
};

// e(t) = alpha ||u||^2 + eps^2/alpha ||sigma||^2 + We/(2 omega) ||tau||^2 for
// the difference of two solutions, with the envelope check
// e(t) <= e(0) exp(2 int X_delta) slack. Throws InvalidArgument when delta is
// not below uniqueness_delta_limit.
UniquenessReport uniqueness_experiment(const IterTriple& sol1, const IterTriple& sol2, double delta,
                                       double C12, const FluidParams& params, double slack = 1.0);

// Smallest C12 for which the envelope holds without slack.
double fit_C12(const IterTriple& sol1, const IterTriple& sol2, double delta,
               const FluidParams& params);

}  // namespace oldroyd
