#include "oldroyd/norms.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "oldroyd/errors.hpp"
#include "oldroyd/operators.hpp"

namespace oldroyd {

namespace {

double weighted_sq(const Grid& grid, std::span<const double> f) {
    const auto& w = grid.weights();
    double s = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) s += w[n] * f[n] * f[n];
    return s;
}

// Sum over multi-indices of order 1..k of ||d^beta f||^2, enumerating each
// multi-index once through nondecreasing axis sequences.
double derivative_sq(const Grid& grid, const std::vector<double>& f, int first_axis, int remaining) {
    if (remaining == 0) return 0.0;
    double s = 0.0;
    std::vector<double> df(f.size());
    for (int axis = first_axis; axis < grid.dim(); ++axis) {
        derivative(grid, f, axis, df);
        s += weighted_sq(grid, df);
        s += derivative_sq(grid, df, axis, remaining - 1);
    }
    return s;
}

}  // namespace

double inner(const Field& a, const Field& b) {
    a.require_compatible(b, "inner");
    const auto& w = a.grid().weights();
    double s = 0.0;
    for (int c = 0; c < a.components(); ++c) {
        auto ac = a.component(c);
        auto bc = b.component(c);
        double sc = 0.0;
        for (std::size_t n = 0; n < ac.size(); ++n) sc += w[n] * ac[n] * bc[n];
        s += a.multiplicity(c) * sc;
    }
    return s;
}

double norm_squared(const Field& f, int k) {
    if (k < 0 || k > 3) {
        throw InvalidArgument("norm order must be in 0..3, got " + std::to_string(k));
    }
    double s = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        auto comp = f.component(c);
        double sc = weighted_sq(f.grid(), comp);
        if (k > 0) {
            const std::vector<double> copy(comp.begin(), comp.end());
            sc += derivative_sq(f.grid(), copy, 0, k);
        }
        s += f.multiplicity(c) * sc;
    }
    return s;
}

double norm(const Field& f, int k) { return std::sqrt(norm_squared(f, k)); }

double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double mean(const ScalarField& f) {
    const auto& w = f.grid().weights();
    auto v = f.component(0);
    double s = 0.0;
    double wsum = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
        s += w[n] * v[n];
        wsum += w[n];
    }
    return s / wsum;
}

ScalarField mean_zero_project(const ScalarField& f) {
    ScalarField out = f;
    const double m = mean(f);
    for (double& v : out.values()) v -= m;
    return out;
}

}  // namespace oldroyd
