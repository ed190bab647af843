#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>

#include "oldroyd/field.hpp"
#include "oldroyd/grid.hpp"

namespace testing_support {

using namespace oldroyd;

inline constexpr double kPi = std::numbers::pi;

// OLDROYD_SEED fixes every randomized test field.
inline std::uint64_t seed() {
    if (const char* s = std::getenv("OLDROYD_SEED")) return std::strtoull(s, nullptr, 10);
    return 20240917u;
}

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(seed());
    return gen;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline GridPtr unit(int dim, int n) { return Grid::unit(dim, n); }

template <class F>
ScalarField sample(const GridPtr& g, F fn) {
    ScalarField f(g);
    for (std::size_t n = 0; n < g->node_count(); ++n) f[n] = fn(g->position(n));
    return f;
}

// Smooth random Dirichlet field: a few sine modes per component with random
// coefficients, vanishing on the unit box boundary.
inline VectorField random_dirichlet(const GridPtr& g, int modes = 3) {
    VectorField v(g);
    const int d = g->dim();
    for (int c = 0; c < d; ++c) {
        for (int m = 0; m < modes; ++m) {
            const double amp = uniform();
            const int kx = 1 + m % 2, ky = 1 + (m + 1) % 3, kz = 1 + m % 2;
            for (std::size_t n = 0; n < g->node_count(); ++n) {
                const auto p = g->position(n);
                double s = std::sin(kx * kPi * p[0]) * std::sin(ky * kPi * p[1]);
                if (d == 3) s *= std::sin(kz * kPi * p[2]);
                v(c, n) += amp * s;
            }
        }
    }
    v.enforce_dirichlet();
    return v;
}

inline double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace testing_support
