#include "oldroyd/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oldroyd {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

CgResult conjugate_gradient(const LinearOperator& apply, std::span<const double> rhs,
                            std::span<double> x, double tol, int max_iter) {
    CgResult result;
    const std::size_t n = rhs.size();
    const double bnorm = std::sqrt(dot(rhs, rhs));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        result.converged = true;
        return result;
    }

    std::vector<double> r(n), p(n), Ap(n);
    const double target = tol * bnorm;
    int it = 0;
    // Outer loop restarts from the true residual whenever the recurrence
    // claims convergence that the true residual does not confirm.
    for (;;) {
        apply(x, Ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];
        double rr = dot(r, r);
        if (std::sqrt(rr) <= target || it >= max_iter) break;
        p = r;
        const int start = it;
        while (std::sqrt(rr) > 0.5 * target && it < max_iter) {
            apply(p, Ap);
            const double pAp = dot(p, Ap);
            if (!(pAp > 0.0)) break;
            const double step = rr / pAp;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += step * p[i];
                r[i] -= step * Ap[i];
            }
            const double rr_new = dot(r, r);
            const double beta = rr_new / rr;
            rr = rr_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
            ++it;
        }
        if (it == start) break;
    }

    result.iterations = it;
    result.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    result.converged = result.relative_residual <= tol;
    return result;
}

}  // namespace oldroyd
