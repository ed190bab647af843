#pragma once

#include <array>
#include <vector>

#include "oldroyd/field.hpp"
#include "oldroyd/params.hpp"
#include "oldroyd/rheology.hpp"

namespace oldroyd {

// Departure points of the backward characteristics through every node for one
// step, in index coordinates (node (i, j, k) sits at (i, j, k)). Working in
// index space keeps x_dep = x bit-exact wherever the velocity vanishes.
struct CharacteristicMap {
    GridPtr grid;
    double dt = 0.0;
    std::vector<std::array<double, 3>> departure;
    // Set where a round-off excursion outside the box was clipped back.
    std::vector<unsigned char> clipped;
    double max_excursion = 0.0;  // largest clipped distance, index units

    // Physical coordinates of a departure point.
    std::array<double, 3> position(std::size_t node) const;
};

// Excursions beyond this many index units raise DepartureExcursion.
inline constexpr double kDepartureTolerance = 1e-8;

// Midpoint (RK2) backward trace x_dep = x - dt w(x - dt/2 w(x)) with
// multilinear velocity interpolation. Requires a Dirichlet velocity.
CharacteristicMap trace(const VectorField& w, double dt);

// Multilinear interpolation of component c at index coordinates s, which must
// lie in the closed index box.
double interpolate(const Field& f, int c, const std::array<double, 3>& s);

// Values of `src` at the departure points, written into `dst` (same shape).
void advect(const Field& src, const CharacteristicMap& map, Field& dst);

struct DensityStep {
    ScalarField sigma;
    double mean_preproject = 0.0;
    BandExtrema band;
};

// Relative slack on the band edges accepted by step_density.
inline constexpr double kBandTolerance = 1e-12;

// One step of sigma' + (w . grad) sigma + sigma div w = -eps^-2 alpha div w.
// Along each characteristic the ODE is integrated exactly with div w frozen at
// the arrival node, then the mean is projected out. Throws
// DensityBandViolation if alpha + eps^2 sigma leaves [m1/2, 2 M1] beyond
// kBandTolerance.
DensityStep step_density(const ScalarField& sigma_prev, const VectorField& w, double dt,
                         const FluidParams& params);
DensityStep step_density(const ScalarField& sigma_prev, const VectorField& w,
                         const CharacteristicMap& map, const FluidParams& params);

// One step of tau + We (tau' + (w . grad) tau + g(grad w, tau)) = 2 omega D[w].
// After advection the local system tau' = -M tau + (2 omega / We) D, with
// M tau = tau / We + g(grad w, tau), is integrated by the theta scheme
//   (I + theta dt M) tau1 = (I - (1 - theta) dt M) tau_dep + dt (2 omega / We) D
// through a dense solve on the packed symmetric components. theta = 1 is
// backward Euler, theta = 1/2 Crank-Nicolson. Throws SingularStressSystem.
SymTensorField step_stress(const SymTensorField& tau_prev, const VectorField& w, double dt,
                           const FluidParams& params, double theta = 0.5);
SymTensorField step_stress(const SymTensorField& tau_prev, const VectorField& w,
                           const CharacteristicMap& map, const FluidParams& params,
                           double theta = 0.5);

// ============================================================================
// A priori transport bounds with fitted constants
// ============================================================================

// Histories hold x[0..N] and w[0..N]; step n -> n+1 was driven by w[n+1].
struct TransportBoundReport {
    double sup_norm = 0.0;     // sup_t ||x||_2
    double sup_rate = 0.0;     // sup_t ||x'||_1, backward differences
    double w_l1_h3 = 0.0;      // sum_n dt ||w[n+1]||_3
    double w_sup_h2 = 0.0;     // sup_t ||w||_2
    double initial_h2 = 0.0;   // ||x0||_2
    double initial_l2 = 0.0;   // ||x0||
    double C_omega = 0.0;      // constant used for the bounds below
    double bound = 0.0;        // right side of the sup-norm bound at C_omega
    double rate_bound = 0.0;   // right side of the rate bound
    bool holds = true;         // sup_norm <= bound and sup_rate <= rate_bound
    // Density: C_omega = max(C_bound, C_rate).
    double C_bound = 0.0;
    double C_rate = 0.0;
    // Stress: fitted C0 of the rate bound.
    double C0 = 0.0;
    std::vector<double> running_C_omega;  // density fit after each step
    std::vector<double> sup_h2_history;   // ||x[n]||_2 per time level
};

// Density lemma:
//   sup ||sigma||_2 <= (||sigma0||_2 + alpha eps^-2) exp(C L),
//   sup ||sigma'||_1 <= C ||w||_{Linf H2} (||sigma0||_2 + alpha eps^-2) exp(C L),
// L = ||w||_{L1 H3}. Fits the smallest C satisfying both.
TransportBoundReport check_density_bounds(const std::vector<ScalarField>& sigma,
                                          const std::vector<VectorField>& w, double dt,
                                          const FluidParams& params);

// Stress lemma at a given C (normally the density fit):
//   sup ||tau||_2 <= (||tau0||_2 + 2 omega / (C We)) exp(C L),
// and fits C0 in
//   sup ||tau'||_1 <= C0 (||w||_{Linf H2} + 1/(C We)) (||tau0||_2 + 2 omega/(C We)) exp(C L).
TransportBoundReport check_stress_bounds(const std::vector<SymTensorField>& tau,
                                         const std::vector<VectorField>& w, double dt,
                                         const FluidParams& params, double C_omega);

// Smallest C >= 0 with C exp(C L) >= r.
double solve_rate_constant(double r, double L);

}  // namespace oldroyd
