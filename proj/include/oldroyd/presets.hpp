#pragma once

#include <string>
#include <vector>

#include "oldroyd/field.hpp"
#include "oldroyd/fixed_point.hpp"

namespace oldroyd {

// Registered initial-condition presets. Coordinates are scaled to the unit
// box, so every preset vanishes (or has zero mean) on any box extent.
//
//   velocity: zero | vortex
//       vortex = A (sin^2(pi x) sin(2 pi y), -sin(2 pi x) sin^2(pi y)) in 2D;
//       in 3D the same field in the (x, y) plane times sin^2(pi z) is used.
//   density:  zero | cosine-density      A cos(2 pi x) cos(2 pi y) [cos(2 pi z)]
//   stress:   zero | proportional-stress A D[u0]
VectorField velocity_preset(const std::string& name, const GridPtr& grid, double amplitude);
ScalarField density_preset(const std::string& name, const GridPtr& grid, double amplitude);
SymTensorField stress_preset(const std::string& name, const VectorField& u0, double amplitude);

const std::vector<std::string>& velocity_preset_names();
const std::vector<std::string>& density_preset_names();
const std::vector<std::string>& stress_preset_names();
const std::vector<std::string>& forcing_preset_names();

// Body force at time t.
//   zero
//   uniform     A e_1
//   pulsating   A (1 + sin(2 pi t / period)) (sin(pi y), -sin(pi x)) in the (x, y) plane
VectorField forcing_preset(const std::string& name, const GridPtr& grid, double amplitude, double t,
                           double period = 0.02);
ForcingHistory forcing_history(const std::string& name, const GridPtr& grid, double amplitude,
                               double dt, std::size_t steps, double period = 0.02);

}  // namespace oldroyd
