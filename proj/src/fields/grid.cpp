#include "oldroyd/grid.hpp"

#include <string>

#include "oldroyd/errors.hpp"

namespace oldroyd {

Grid::Grid(int dim, std::array<int, 3> cells, std::array<double, 3> extent) : dim_(dim) {
    if (dim != 2 && dim != 3) {
        throw InvalidArgument("grid dimension must be 2 or 3, got " + std::to_string(dim));
    }
    for (int d = 0; d < kMaxDim; ++d) {
        if (d < dim) {
            if (cells[d] < kMinCells) {
                throw InvalidArgument("grid needs at least " + std::to_string(kMinCells) +
                                      " cells per axis, axis " + std::to_string(d) + " has " +
                                      std::to_string(cells[d]));
            }
            if (!(extent[d] > 0.0)) {
                throw InvalidArgument("grid extent must be positive on axis " + std::to_string(d));
            }
            cells_[d] = cells[d];
            nodes_[d] = cells[d] + 1;
            extent_[d] = extent[d];
            h_[d] = extent[d] / cells[d];
            cell_volume_ *= h_[d];
        } else {
            cells_[d] = 0;
            nodes_[d] = 1;
            extent_[d] = 0.0;
            h_[d] = 1.0;
        }
    }
    stride_[2] = 1;
    stride_[1] = static_cast<std::size_t>(nodes_[2]);
    stride_[0] = stride_[1] * static_cast<std::size_t>(nodes_[1]);
    // In 2D axis 1 is the fastest; stride_[2] is irrelevant since k == 0.
    node_count_ = stride_[0] * static_cast<std::size_t>(nodes_[0]);

    boundary_.assign(node_count_, 0);
    weights_.assign(node_count_, cell_volume_);
    for (std::size_t node = 0; node < node_count_; ++node) {
        const auto mi = multi_index(node);
        for (int d = 0; d < dim_; ++d) {
            if (mi[d] == 0 || mi[d] == cells_[d]) {
                boundary_[node] = 1;
                weights_[node] *= 0.5;
            }
        }
    }
}

GridPtr Grid::unit(int dim, int n) {
    return std::make_shared<const Grid>(dim, std::array<int, 3>{n, n, n},
                                        std::array<double, 3>{1.0, 1.0, 1.0});
}

GridPtr Grid::make(int dim, std::array<int, 3> cells, std::array<double, 3> extent) {
    return std::make_shared<const Grid>(dim, cells, extent);
}

double Grid::domain_volume() const noexcept {
    double v = 1.0;
    for (int d = 0; d < dim_; ++d) v *= extent_[d];
    return v;
}

std::array<int, 3> Grid::multi_index(std::size_t node) const noexcept {
    std::array<int, 3> mi{0, 0, 0};
    for (int d = 0; d < kMaxDim; ++d) {
        mi[d] = static_cast<int>(node / stride_[d]);
        node -= static_cast<std::size_t>(mi[d]) * stride_[d];
    }
    return mi;
}

std::array<double, 3> Grid::position(std::size_t node) const noexcept {
    const auto mi = multi_index(node);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim_; ++d) x[d] = mi[d] * h_[d];
    return x;
}

bool Grid::same_layout(const Grid& other) const noexcept {
    if (dim_ != other.dim_) return false;
    for (int d = 0; d < dim_; ++d) {
        if (cells_[d] != other.cells_[d] || extent_[d] != other.extent_[d]) return false;
    }
    return true;
}

}  // namespace oldroyd
