#pragma once

#include <functional>
#include <span>

namespace oldroyd {

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;  // ||b - A x|| / ||b||, recomputed at exit
    bool converged = false;
};

// Unpreconditioned conjugate gradients for a symmetric positive (semi)definite
// operator. `x` holds the initial guess on entry. A zero right side returns
// x = 0 immediately.
CgResult conjugate_gradient(const LinearOperator& apply, std::span<const double> rhs,
                            std::span<double> x, double tol, int max_iter);

}  // namespace oldroyd
