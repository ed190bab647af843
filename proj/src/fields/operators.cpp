#include "oldroyd/operators.hpp"

#include <string>
#include <vector>

#include "oldroyd/errors.hpp"

namespace oldroyd {

namespace {

int axis_index(const Grid& grid, std::size_t node, int axis) {
    return static_cast<int>((node / grid.stride(axis)) % static_cast<std::size_t>(grid.nodes(axis)));
}

}  // namespace

void derivative(const Grid& grid, std::span<const double> f, int axis, std::span<double> out) {
    const std::size_t s = grid.stride(axis);
    const int n = grid.cells(axis);
    const double inv2h = 0.5 / grid.spacing(axis);
    for (std::size_t node = 0; node < f.size(); ++node) {
        const int i = axis_index(grid, node, axis);
        if (i == 0) {
            out[node] = (-3.0 * f[node] + 4.0 * f[node + s] - f[node + 2 * s]) * inv2h;
        } else if (i == n) {
            out[node] = (3.0 * f[node] - 4.0 * f[node - s] + f[node - 2 * s]) * inv2h;
        } else {
            out[node] = (f[node + s] - f[node - s]) * inv2h;
        }
    }
}

void second_derivative(const Grid& grid, std::span<const double> f, int axis,
                       std::span<double> out) {
    const std::size_t s = grid.stride(axis);
    const int n = grid.cells(axis);
    const double h = grid.spacing(axis);
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t node = 0; node < f.size(); ++node) {
        const int i = axis_index(grid, node, axis);
        if (i == 0) {
            out[node] = (2.0 * f[node] - 5.0 * f[node + s] + 4.0 * f[node + 2 * s] -
                         f[node + 3 * s]) *
                        inv_h2;
        } else if (i == n) {
            out[node] = (2.0 * f[node] - 5.0 * f[node - s] + 4.0 * f[node - 2 * s] -
                         f[node - 3 * s]) *
                        inv_h2;
        } else {
            out[node] = (f[node + s] - 2.0 * f[node] + f[node - s]) * inv_h2;
        }
    }
}

VectorField gradient(const ScalarField& f) {
    VectorField g(f.grid_ptr());
    for (int d = 0; d < f.grid().dim(); ++d) derivative(f.grid(), f.component(0), d, g.component(d));
    return g;
}

TensorField gradient(const VectorField& v) {
    const int dim = v.grid().dim();
    TensorField L(v.grid_ptr());
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) derivative(v.grid(), v.component(i), j, L.component(i * dim + j));
    }
    return L;
}

ScalarField divergence(const VectorField& v) {
    const Grid& grid = v.grid();
    ScalarField out(v.grid_ptr());
    std::vector<double> tmp(grid.node_count());
    auto acc = out.component(0);
    for (int d = 0; d < grid.dim(); ++d) {
        derivative(grid, v.component(d), d, tmp);
        for (std::size_t n = 0; n < tmp.size(); ++n) acc[n] += tmp[n];
    }
    return out;
}

VectorField div_tensor(const SymTensorField& t) {
    const Grid& grid = t.grid();
    const int dim = grid.dim();
    VectorField out(t.grid_ptr());
    std::vector<double> tmp(grid.node_count());
    for (int i = 0; i < dim; ++i) {
        auto acc = out.component(i);
        for (int j = 0; j < dim; ++j) {
            derivative(grid, t.component(sym_index(i, j, dim)), j, tmp);
            for (std::size_t n = 0; n < tmp.size(); ++n) acc[n] += tmp[n];
        }
    }
    return out;
}

namespace {

void laplacian_component(const Grid& grid, std::span<const double> f, std::span<double> out) {
    std::vector<double> tmp(grid.node_count());
    std::fill(out.begin(), out.end(), 0.0);
    for (int d = 0; d < grid.dim(); ++d) {
        second_derivative(grid, f, d, tmp);
        for (std::size_t n = 0; n < tmp.size(); ++n) out[n] += tmp[n];
    }
}

}  // namespace

VectorField laplacian(const VectorField& v) {
    VectorField out(v.grid_ptr());
    for (int c = 0; c < v.components(); ++c) laplacian_component(v.grid(), v.component(c), out.component(c));
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    ScalarField out(f.grid_ptr());
    laplacian_component(f.grid(), f.component(0), out.component(0));
    return out;
}

VectorField convective(const VectorField& w, const VectorField& v) {
    w.require_compatible(v, "convective");
    const Grid& grid = v.grid();
    const int dim = grid.dim();
    VectorField out(v.grid_ptr());
    std::vector<double> tmp(grid.node_count());
    for (int i = 0; i < dim; ++i) {
        auto acc = out.component(i);
        for (int j = 0; j < dim; ++j) {
            derivative(grid, v.component(i), j, tmp);
            auto wj = w.component(j);
            for (std::size_t n = 0; n < tmp.size(); ++n) acc[n] += wj[n] * tmp[n];
        }
    }
    return out;
}

void apply_A_interior(const Grid& grid, std::span<const double> v, std::span<double> out) {
    const int dim = grid.dim();
    const std::size_t nn = grid.node_count();
    const auto& mask = grid.boundary_mask();
    std::array<double, 3> inv_h2{};
    for (int d = 0; d < dim; ++d) inv_h2[d] = 1.0 / (grid.spacing(d) * grid.spacing(d));

    for (int i = 0; i < dim; ++i) {
        const double* vi = v.data() + static_cast<std::size_t>(i) * nn;
        double* oi = out.data() + static_cast<std::size_t>(i) * nn;
        for (std::size_t node = 0; node < nn; ++node) {
            if (mask[node]) {
                oi[node] = 0.0;
                continue;
            }
            double acc = 0.0;
            // lap v_i + d_ii v_i
            for (int k = 0; k < dim; ++k) {
                const std::size_t s = grid.stride(k);
                const double d2 = (vi[node + s] - 2.0 * vi[node] + vi[node - s]) * inv_h2[k];
                acc += (k == i) ? 2.0 * d2 : d2;
            }
            // d_i d_j v_j, j != i, centered cross stencil
            const std::size_t si = grid.stride(i);
            for (int j = 0; j < dim; ++j) {
                if (j == i) continue;
                const double* vj = v.data() + static_cast<std::size_t>(j) * nn;
                const std::size_t sj = grid.stride(j);
                const double cross = vj[node + si + sj] - vj[node + si - sj] -
                                     vj[node - si + sj] + vj[node - si - sj];
                acc += cross / (4.0 * grid.spacing(i) * grid.spacing(j));
            }
            oi[node] = -acc;
        }
    }
}

void apply_neg_laplacian_interior(const Grid& grid, std::span<const double> f,
                                  std::span<double> out) {
    const auto& mask = grid.boundary_mask();
    for (std::size_t node = 0; node < f.size(); ++node) {
        if (mask[node]) {
            out[node] = 0.0;
            continue;
        }
        double acc = 0.0;
        for (int k = 0; k < grid.dim(); ++k) {
            const std::size_t s = grid.stride(k);
            const double h = grid.spacing(k);
            acc += (f[node + s] - 2.0 * f[node] + f[node - s]) / (h * h);
        }
        out[node] = -acc;
    }
}

VectorField op_A(const VectorField& v) {
    if (!v.satisfies_dirichlet()) {
        throw InvalidArgument("op_A requires a Dirichlet velocity field (zero on the boundary)");
    }
    const Grid& grid = v.grid();
    VectorField out(v.grid_ptr());
    apply_A_interior(grid, v.values(), out.values());

    // Boundary rows: one-sided evaluation of -(lap v + grad div v). The
    // component d_i d_i v_i uses the direct second difference; differencing a
    // one-sided divergence along the same axis would drop to first order.
    const VectorField lap = laplacian(v);
    const int dim = grid.dim();
    const std::size_t N = grid.node_count();
    std::vector<double> inner(N), mixed(N), grad_div(N);
    const auto& mask = grid.boundary_mask();
    for (int i = 0; i < dim; ++i) {
        second_derivative(grid, v.component(i), i, grad_div);
        for (int j = 0; j < dim; ++j) {
            if (j == i) continue;
            derivative(grid, v.component(j), j, inner);
            derivative(grid, inner, i, mixed);
            for (std::size_t n = 0; n < N; ++n) grad_div[n] += mixed[n];
        }
        auto o = out.component(i);
        auto l = lap.component(i);
        for (std::size_t n = 0; n < N; ++n) {
            if (mask[n]) o[n] = -(l[n] + grad_div[n]);
        }
    }
    return out;
}

SymTensorField deformation(const TensorField& L) {
    const int dim = L.grid().dim();
    SymTensorField D(L.grid_ptr());
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            auto d = D.component(sym_index(i, j, dim));
            auto lij = L.component(i * dim + j);
            auto lji = L.component(j * dim + i);
            for (std::size_t n = 0; n < d.size(); ++n) d[n] = 0.5 * (lij[n] + lji[n]);
        }
    }
    return D;
}

RateTensors rate_tensors(const VectorField& v) {
    const TensorField L = gradient(v);
    const int dim = v.grid().dim();
    TensorField W(v.grid_ptr());
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            auto w = W.component(i * dim + j);
            auto lij = L.component(i * dim + j);
            auto lji = L.component(j * dim + i);
            for (std::size_t n = 0; n < w.size(); ++n) w[n] = 0.5 * (lij[n] - lji[n]);
        }
    }
    return {deformation(L), std::move(W)};
}

}  // namespace oldroyd
