#include "oldroyd/small_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace oldroyd {

bool solve_dense(std::span<double> A, std::span<double> b, int m, double pivot_floor) {
    double scale = 0.0;
    for (double v : A) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    const double floor = pivot_floor * scale;

    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r) {
            if (std::abs(A[r * m + col]) > std::abs(A[piv * m + col])) piv = r;
        }
        if (std::abs(A[piv * m + col]) <= floor) return false;
        if (piv != col) {
            for (int k = 0; k < m; ++k) std::swap(A[col * m + k], A[piv * m + k]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < m; ++r) {
            const double f = A[r * m + col] / A[col * m + col];
            if (f == 0.0) continue;
            for (int k = col; k < m; ++k) A[r * m + k] -= f * A[col * m + k];
            b[r] -= f * b[col];
        }
    }
    for (int r = m - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < m; ++k) s -= A[r * m + k] * b[k];
        b[r] = s / A[r * m + r];
    }
    return true;
}

}  // namespace oldroyd
