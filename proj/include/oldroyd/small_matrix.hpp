#pragma once

#include <array>
#include <span>

namespace oldroyd {

// Per-node dense tensor (only the leading dim x dim block is used).
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 matmul(const Mat3& a, const Mat3& b, int dim) {
    Mat3 c{};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k) s += a[i][k] * b[k][j];
            c[i][j] = s;
        }
    return c;
}

// Solves the m x m row-major system A x = b in place (b becomes x) by
// Gaussian elimination with partial pivoting. Returns false when a pivot is
// smaller than `pivot_floor` times the largest entry of A.
bool solve_dense(std::span<double> A, std::span<double> b, int m, double pivot_floor = 1e-13);

}  // namespace oldroyd
