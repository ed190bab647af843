#include "oldroyd/rheology.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "oldroyd/errors.hpp"
#include "oldroyd/operators.hpp"

namespace oldroyd {

Mat3 g_term(const Mat3& L, const Mat3& tau, double a, int dim) {
    Mat3 D{}, W{};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            D[i][j] = 0.5 * (L[i][j] + L[j][i]);
            W[i][j] = 0.5 * (L[i][j] - L[j][i]);
        }
    const Mat3 tW = matmul(tau, W, dim);
    const Mat3 Wt = matmul(W, tau, dim);
    const Mat3 Dt = matmul(D, tau, dim);
    const Mat3 tD = matmul(tau, D, dim);
    Mat3 g{};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g[i][j] = tW[i][j] - Wt[i][j] - a * (Dt[i][j] + tD[i][j]);
    return g;
}

SymTensorField g_term(const TensorField& grad_w, const SymTensorField& tau, double a) {
    if (!grad_w.grid().same_layout(tau.grid())) throw InvalidArgument("g_term: grids differ");
    const int dim = tau.grid().dim();
    SymTensorField out(tau.grid_ptr());
    for (std::size_t n = 0; n < tau.nodes(); ++n) {
        Mat3 L{}, t{};
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                L[i][j] = grad_w.at(i, j, n);
                t[i][j] = tau.at(i, j, n);
            }
        const Mat3 g = g_term(L, t, a, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) out.at(i, j, n) = 0.5 * (g[i][j] + g[j][i]);
    }
    return out;
}

ScalarField pressure_w(const ScalarField& sigma, const PressureLaw& law, const FluidParams& params) {
    ScalarField out(sigma.grid_ptr());
    for (std::size_t n = 0; n < sigma.nodes(); ++n) out[n] = law.remainder(sigma[n], params);
    return out;
}

BandExtrema density_band(const ScalarField& pi, const FluidParams& params) {
    BandExtrema b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const double e2 = params.eps * params.eps;
    for (double p : pi.values()) {
        const double rho = params.alpha + e2 * p;
        b.min = std::min(b.min, rho);
        b.max = std::max(b.max, rho);
    }
    return b;
}

void require_density_band(const ScalarField& pi, const FluidParams& params, double low, double high,
                          const char* context) {
    const double e2 = params.eps * params.eps;
    for (std::size_t n = 0; n < pi.nodes(); ++n) {
        const double rho = params.alpha + e2 * pi[n];
        if (!(rho >= low && rho <= high)) {
            const auto x = pi.grid().position(n);
            std::ostringstream msg;
            msg << context << ": density alpha + eps^2*sigma = " << rho << " outside [" << low
                << ", " << high << "] at node " << n << " (x = " << x[0] << ", " << x[1];
            if (pi.grid().dim() == 3) msg << ", " << x[2];
            msg << ")";
            throw DensityBandViolation(msg.str(), n, rho);
        }
    }
}

VectorField source_F(const VectorField& w, const ScalarField& pi, const VectorField& f,
                     const FluidParams& params) {
    require_density_band(pi, params, params.band_low(), params.band_high(), "source_F");
    const double e2 = params.eps * params.eps;
    const VectorField Aw = op_A(w);
    const VectorField grad_pi = gradient(pi);
    const ScalarField wpi = pressure_w(pi, params.pressure, params);

    VectorField out(w.grid_ptr());
    const int dim = w.grid().dim();
    for (std::size_t n = 0; n < pi.nodes(); ++n) {
        const double rho = params.alpha + e2 * pi[n];
        const double c_visc = (1.0 - params.omega) * e2 * pi[n] / rho;
        const double c_pres = e2 / rho * (pi[n] - wpi[n]);
        for (int i = 0; i < dim; ++i) {
            out(i, n) = params.alpha * f(i, n) + c_visc * Aw(i, n) + c_pres * grad_pi(i, n);
        }
    }
    return out;
}

VectorField assemble_forcing(const VectorField& w, const ScalarField& pi, const SymTensorField& psi,
                             const VectorField& f, const FluidParams& params) {
    VectorField out = source_F(w, pi, f, params);
    out.add_scaled(convective(w, w), -params.alpha);
    out.add_scaled(gradient(pi), -1.0);
    out.add_scaled(div_tensor(psi), 1.0);
    return out;
}

}  // namespace oldroyd
