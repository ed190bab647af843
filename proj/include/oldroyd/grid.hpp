#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace oldroyd {

// Uniform node-centered Cartesian grid on the box [0, extent_0] x ... .
//
// Axis 0 is the slowest-varying index in storage; the last active axis is
// the fastest. Unused axes (d >= dim) have a single node.
class Grid {
public:
    static constexpr int kMaxDim = 3;
    static constexpr int kMinCells = 8;

    Grid(int dim, std::array<int, 3> cells, std::array<double, 3> extent);

    // Square/cubic grid with n cells per axis on the unit box.
    static std::shared_ptr<const Grid> unit(int dim, int n);
    static std::shared_ptr<const Grid> make(int dim, std::array<int, 3> cells,
                                            std::array<double, 3> extent);

    int dim() const noexcept { return dim_; }
    int cells(int axis) const noexcept { return cells_[axis]; }
    int nodes(int axis) const noexcept { return nodes_[axis]; }
    double extent(int axis) const noexcept { return extent_[axis]; }
    double spacing(int axis) const noexcept { return h_[axis]; }
    std::size_t stride(int axis) const noexcept { return stride_[axis]; }
    std::size_t node_count() const noexcept { return node_count_; }

    // Product of spacings over the active axes.
    double cell_volume() const noexcept { return cell_volume_; }
    double domain_volume() const noexcept;

    std::size_t index(int i, int j = 0, int k = 0) const noexcept {
        return static_cast<std::size_t>(i) * stride_[0] + static_cast<std::size_t>(j) * stride_[1] +
               static_cast<std::size_t>(k) * stride_[2];
    }
    std::array<int, 3> multi_index(std::size_t node) const noexcept;
    std::array<double, 3> position(std::size_t node) const noexcept;

    bool on_boundary(std::size_t node) const noexcept { return boundary_[node] != 0; }
    const std::vector<unsigned char>& boundary_mask() const noexcept { return boundary_; }

    // Trapezoidal quadrature weight of each node (cell_volume scaled by 1/2 per
    // boundary axis), so that sum(weights) equals the domain volume.
    const std::vector<double>& weights() const noexcept { return weights_; }

    bool same_layout(const Grid& other) const noexcept;

private:
    int dim_;
    std::array<int, 3> cells_{};
    std::array<int, 3> nodes_{};
    std::array<double, 3> extent_{};
    std::array<double, 3> h_{};
    std::array<std::size_t, 3> stride_{};
    std::size_t node_count_ = 0;
    double cell_volume_ = 1.0;
    std::vector<unsigned char> boundary_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace oldroyd
