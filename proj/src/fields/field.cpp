#include "oldroyd/field.hpp"

#include <algorithm>
#include <string>

#include "oldroyd/errors.hpp"

namespace oldroyd {

Field::Field(GridPtr grid, int components, double fill)
    : grid_(std::move(grid)), components_(components) {
    if (!grid_) throw InvalidArgument("field constructed without a grid");
    values_.assign(static_cast<std::size_t>(components_) * grid_->node_count(), fill);
    multiplicity_.assign(static_cast<std::size_t>(components_), 1.0);
}

void Field::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void Field::add_scaled(const Field& other, double s) {
    require_compatible(other, "add_scaled");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
}

void Field::scale(double s) {
    for (double& v : values_) v *= s;
}

void Field::require_compatible(const Field& other, const char* context) const {
    if (components_ != other.components_ ||
        (grid_ != other.grid_ && !grid_->same_layout(*other.grid_))) {
        throw InvalidArgument(std::string(context) + ": fields live on different grids or shapes");
    }
}

VectorField::VectorField(GridPtr grid, double fill) : Field(grid, grid ? grid->dim() : 0, fill) {}

void VectorField::enforce_dirichlet() {
    const auto& mask = grid().boundary_mask();
    for (int c = 0; c < components(); ++c) {
        auto comp = component(c);
        for (std::size_t n = 0; n < comp.size(); ++n) {
            if (mask[n]) comp[n] = 0.0;
        }
    }
    dirichlet_ = true;
}

bool VectorField::satisfies_dirichlet() const noexcept {
    if (!dirichlet_) return false;
    const auto& mask = grid().boundary_mask();
    for (int c = 0; c < components(); ++c) {
        auto comp = component(c);
        for (std::size_t n = 0; n < comp.size(); ++n) {
            if (mask[n] && comp[n] != 0.0) return false;
        }
    }
    return true;
}

int sym_components(int dim) noexcept { return dim * (dim + 1) / 2; }

int sym_index(int i, int j, int dim) noexcept {
    if (i > j) std::swap(i, j);
    // Row i of the upper triangle starts after i rows of decreasing length.
    return i * dim - i * (i - 1) / 2 + (j - i);
}

SymTensorField::SymTensorField(GridPtr grid, double fill)
    : Field(grid, grid ? sym_components(grid->dim()) : 0, fill) {
    const int dim = this->grid().dim();
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) set_multiplicity(sym_index(i, j, dim), 2.0);
}

SymTensorField SymTensorField::identity(GridPtr grid, double value) {
    SymTensorField t(grid);
    const int dim = grid->dim();
    for (int i = 0; i < dim; ++i) {
        auto comp = t.component(sym_index(i, i, dim));
        std::fill(comp.begin(), comp.end(), value);
    }
    return t;
}

TensorField::TensorField(GridPtr grid, double fill)
    : Field(grid, grid ? grid->dim() * grid->dim() : 0, fill) {}

}  // namespace oldroyd
