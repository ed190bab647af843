#pragma once

#include "oldroyd/field.hpp"

namespace oldroyd {

// Discrete L2 inner product with trapezoidal node weights, summed over components.
double inner(const Field& a, const Field& b);

// Discrete H^k norm, k in {0,1,2,3}: square root of the sum over all
// derivative multi-indices |beta| <= k of the weighted L2 norms squared.
// Derivatives are repeated first-derivative difference quotients; this is
// a discrete stand-in for the continuum H^k norm. k > 3 throws.
double norm(const Field& f, int k = 0);

// Squared H^k norm, avoids the sqrt/square round trip in time integrals.
double norm_squared(const Field& f, int k = 0);

double max_abs(const Field& f);

// Weighted mean over the domain.
double mean(const ScalarField& f);
ScalarField mean_zero_project(const ScalarField& f);

}  // namespace oldroyd
