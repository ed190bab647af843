#pragma once

#include <cassert>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "oldroyd/grid.hpp"

namespace oldroyd {

// Grid-sampled data with a fixed number of components per node.
// Storage is component-major: all nodes of component 0, then component 1, ...
class Field {
public:
    Field(GridPtr grid, int components, double fill = 0.0);

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    int components() const noexcept { return components_; }
    std::size_t nodes() const noexcept { return grid_->node_count(); }

    std::span<double> component(int c) noexcept {
        return {values_.data() + static_cast<std::size_t>(c) * nodes(), nodes()};
    }
    std::span<const double> component(int c) const noexcept {
        return {values_.data() + static_cast<std::size_t>(c) * nodes(), nodes()};
    }

    double& operator()(int c, std::size_t node) noexcept {
        assert(c < components_ && node < nodes());
        return values_[static_cast<std::size_t>(c) * nodes() + node];
    }
    double operator()(int c, std::size_t node) const noexcept {
        assert(c < components_ && node < nodes());
        return values_[static_cast<std::size_t>(c) * nodes() + node];
    }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    void fill(double v);
    void add_scaled(const Field& other, double s);
    void scale(double s);

    // Throws InvalidArgument when grids or component counts differ.
    void require_compatible(const Field& other, const char* context) const;

    // How many entries of the full tensor a stored component stands for
    // (2 for off-diagonal entries of a packed symmetric tensor, else 1).
    // Inner products and norms weight each component by it.
    double multiplicity(int c) const noexcept { return multiplicity_[c]; }

protected:
    void set_multiplicity(int c, double m) { multiplicity_[c] = m; }

private:
    GridPtr grid_;
    int components_;
    std::vector<double> values_;
    std::vector<double> multiplicity_;
};

class ScalarField : public Field {
public:
    explicit ScalarField(GridPtr grid, double fill = 0.0) : Field(std::move(grid), 1, fill) {}

    double& operator[](std::size_t node) noexcept { return (*this)(0, node); }
    double operator[](std::size_t node) const noexcept { return (*this)(0, node); }
};

// Velocity-like field with `dim` components. The Dirichlet flag records that
// the field vanishes on every boundary node; enforce_dirichlet() establishes it.
class VectorField : public Field {
public:
    explicit VectorField(GridPtr grid, double fill = 0.0);

    bool dirichlet() const noexcept { return dirichlet_; }
    void enforce_dirichlet();
    // Flag set and every boundary value exactly zero.
    bool satisfies_dirichlet() const noexcept;

    void add_scaled(const VectorField& other, double s) {
        Field::add_scaled(other, s);
        dirichlet_ = dirichlet_ && other.dirichlet_;
    }

private:
    bool dirichlet_ = false;
};

int sym_components(int dim) noexcept;
// Position of (i, j) in the packed upper triangle, row-major; symmetric in i, j.
int sym_index(int i, int j, int dim) noexcept;

// Symmetric tensor field storing the upper triangle only.
class SymTensorField : public Field {
public:
    explicit SymTensorField(GridPtr grid, double fill = 0.0);

    double at(int i, int j, std::size_t node) const noexcept {
        return (*this)(sym_index(i, j, grid().dim()), node);
    }
    double& at(int i, int j, std::size_t node) noexcept {
        return (*this)(sym_index(i, j, grid().dim()), node);
    }

    // Identity tensor times `value` at every node.
    static SymTensorField identity(GridPtr grid, double value = 1.0);
};

// Full dim x dim tensor field, row-major per node: entry (i, j) is component i*dim + j.
class TensorField : public Field {
public:
    explicit TensorField(GridPtr grid, double fill = 0.0);

    double at(int i, int j, std::size_t node) const noexcept {
        return (*this)(i * grid().dim() + j, node);
    }
    double& at(int i, int j, std::size_t node) noexcept { return (*this)(i * grid().dim() + j, node); }
};

template <class F>
concept FieldType = std::derived_from<F, Field>;

template <FieldType F>
F operator+(F lhs, const F& rhs) {
    lhs.add_scaled(rhs, 1.0);
    return lhs;
}

template <FieldType F>
F operator-(F lhs, const F& rhs) {
    lhs.add_scaled(rhs, -1.0);
    return lhs;
}

template <FieldType F>
F operator*(double s, F f) {
    f.scale(s);
    return f;
}

}  // namespace oldroyd
