#include "oldroyd/presets.hpp"

#include <cmath>
#include <numbers>

#include "oldroyd/errors.hpp"
#include "oldroyd/operators.hpp"

namespace oldroyd {

namespace {

constexpr double pi = std::numbers::pi;

// Position scaled to the unit box.
std::array<double, 3> unit_position(const Grid& g, std::size_t n) {
    auto x = g.position(n);
    for (int a = 0; a < g.dim(); ++a) x[a] /= g.extent(a);
    return x;
}

[[noreturn]] void unknown(const char* kind, const std::string& name) {
    throw ConfigError(std::string("unknown ") + kind + " preset '" + name + "'");
}

double sq(double v) { return v * v; }

}  // namespace

const std::vector<std::string>& velocity_preset_names() {
    static const std::vector<std::string> names{"zero", "vortex"};
    return names;
}
const std::vector<std::string>& density_preset_names() {
    static const std::vector<std::string> names{"zero", "cosine-density"};
    return names;
}
const std::vector<std::string>& stress_preset_names() {
    static const std::vector<std::string> names{"zero", "proportional-stress"};
    return names;
}
const std::vector<std::string>& forcing_preset_names() {
    static const std::vector<std::string> names{"zero", "uniform", "pulsating"};
    return names;
}

VectorField velocity_preset(const std::string& name, const GridPtr& grid, double amplitude) {
    VectorField u(grid);
    if (name == "vortex") {
        for (std::size_t n = 0; n < grid->node_count(); ++n) {
            const auto x = unit_position(*grid, n);
            const double z = grid->dim() == 3 ? sq(std::sin(pi * x[2])) : 1.0;
            u(0, n) = amplitude * sq(std::sin(pi * x[0])) * std::sin(2 * pi * x[1]) * z;
            u(1, n) = -amplitude * std::sin(2 * pi * x[0]) * sq(std::sin(pi * x[1])) * z;
        }
    } else if (name != "zero") {
        unknown("velocity", name);
    }
    u.enforce_dirichlet();
    return u;
}

ScalarField density_preset(const std::string& name, const GridPtr& grid, double amplitude) {
    ScalarField s(grid);
    if (name == "cosine-density") {
        for (std::size_t n = 0; n < grid->node_count(); ++n) {
            const auto x = unit_position(*grid, n);
            double v = amplitude * std::cos(2 * pi * x[0]) * std::cos(2 * pi * x[1]);
            if (grid->dim() == 3) v *= std::cos(2 * pi * x[2]);
            s[n] = v;
        }
    } else if (name != "zero") {
        unknown("density", name);
    }
    return s;
}

SymTensorField stress_preset(const std::string& name, const VectorField& u0, double amplitude) {
    if (name == "proportional-stress") {
        SymTensorField t = rate_tensors(u0).D;
        t.scale(amplitude);
        return t;
    }
    if (name != "zero") unknown("stress", name);
    return SymTensorField(u0.grid_ptr());
}

VectorField forcing_preset(const std::string& name, const GridPtr& grid, double amplitude, double t,
                           double period) {
    VectorField f(grid);
    if (name == "uniform") {
        auto c = f.component(0);
        std::fill(c.begin(), c.end(), amplitude);
    } else if (name == "pulsating") {
        const double s = amplitude * (1.0 + std::sin(2 * pi * t / period));
        for (std::size_t n = 0; n < grid->node_count(); ++n) {
            const auto x = unit_position(*grid, n);
            f(0, n) = s * std::sin(pi * x[1]);
            f(1, n) = -s * std::sin(pi * x[0]);
        }
    } else if (name != "zero") {
        unknown("forcing", name);
    }
    return f;
}

ForcingHistory forcing_history(const std::string& name, const GridPtr& grid, double amplitude,
                               double dt, std::size_t steps, double period) {
    ForcingHistory f;
    f.reserve(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        f.push_back(forcing_preset(name, grid, amplitude, dt * static_cast<double>(n), period));
    }
    return f;
}

}  // namespace oldroyd
