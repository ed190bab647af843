#pragma once

#include "oldroyd/field.hpp"
#include "oldroyd/params.hpp"
#include "oldroyd/small_matrix.hpp"

namespace oldroyd {

// Non-transport part of the objective derivative of tau:
//   g(grad w, tau) = tau W - W tau - a (D tau + tau D),
// with D, W the symmetric and skew parts of grad w (entry (i,j) = d w_i/d x_j).
// a = 1 gives the upper-convected derivative, a = -1 the lower-convected one.
Mat3 g_term(const Mat3& grad_w, const Mat3& tau, double a, int dim);
SymTensorField g_term(const TensorField& grad_w, const SymTensorField& tau, double a);

// Pressure remainder w(sigma) = dp/drho(alpha + eps^2 sigma) - dp/drho(alpha),
// nodewise. Throws PressureRangeError on an unphysical density.
ScalarField pressure_w(const ScalarField& sigma, const PressureLaw& law, const FluidParams& params);

// Throws DensityBandViolation (with the offending node) unless
// low <= alpha + eps^2 pi <= high everywhere.
void require_density_band(const ScalarField& pi, const FluidParams& params, double low, double high,
                          const char* context);

struct BandExtrema {
    double min = 0.0;
    double max = 0.0;
};
BandExtrema density_band(const ScalarField& pi, const FluidParams& params);

// Source term F(w, pi) of the momentum equation:
//   alpha f + (1-omega) eps^2 pi/(alpha + eps^2 pi) A w
//           + eps^2/(alpha + eps^2 pi) (pi - w(pi)) grad pi.
// Requires m1/2 <= alpha + eps^2 pi <= 2 M1 at every node.
VectorField source_F(const VectorField& w, const ScalarField& pi, const VectorField& f,
                     const FluidParams& params);

// Full right side of the linear velocity problem for frozen (w, pi, psi):
//   F(w, pi) - alpha (w . grad) w - grad pi + div psi.
VectorField assemble_forcing(const VectorField& w, const ScalarField& pi, const SymTensorField& psi,
                             const VectorField& f, const FluidParams& params);

}  // namespace oldroyd
