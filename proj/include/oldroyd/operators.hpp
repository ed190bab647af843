#pragma once

#include <span>
#include <utility>

#include "oldroyd/field.hpp"

namespace oldroyd {

// ============================================================================
// Difference operators on the collocated node grid.
//
// First derivatives: second-order centered differences in the interior and
// second-order one-sided differences on boundary nodes. Second derivatives:
// compact three-point stencil inside, four-point one-sided closure on the
// boundary. All operators are exact on affine data.
// ============================================================================

// d/dx_axis of one component array, written into `out` (same size).
void derivative(const Grid& grid, std::span<const double> f, int axis, std::span<double> out);
// d^2/dx_axis^2 of one component array.
void second_derivative(const Grid& grid, std::span<const double> f, int axis,
                       std::span<double> out);

VectorField gradient(const ScalarField& f);
// Entry (i, j) is d v_i / d x_j.
TensorField gradient(const VectorField& v);
ScalarField divergence(const VectorField& v);
// Row-wise divergence: (div t)_i = sum_j d t_ij / d x_j.
VectorField div_tensor(const SymTensorField& t);
VectorField laplacian(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
// (w . grad) v
VectorField convective(const VectorField& w, const VectorField& v);

// Lame-type elliptic operator A v = -(lap v + grad div v) for Dirichlet fields.
//
// Interior nodes use the compact stencil (three-point second derivatives and
// the centered cross stencil for mixed terms), which makes the operator
// symmetric positive definite on the interior unknowns. Boundary nodes carry
// the one-sided evaluation of the same expression. Throws InvalidArgument
// unless `v.satisfies_dirichlet()`.
VectorField op_A(const VectorField& v);

// Interior-only action of op_A on raw component-major storage; boundary
// entries of `out` are set to zero. Used by the Krylov solver.
void apply_A_interior(const Grid& grid, std::span<const double> v, std::span<double> out);
// Interior-only action of -lap (compact stencil), one component.
void apply_neg_laplacian_interior(const Grid& grid, std::span<const double> f,
                                  std::span<double> out);

// Rate of deformation D = (grad v + grad v^T)/2 and rate of rotation
// W = (grad v - grad v^T)/2.
struct RateTensors {
    SymTensorField D;
    TensorField W;
};
RateTensors rate_tensors(const VectorField& v);
SymTensorField deformation(const TensorField& grad_v);

}  // namespace oldroyd
