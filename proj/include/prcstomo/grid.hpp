#pragma once

#include <span>
#include <vector>

namespace prcstomo {

/// Uniform grid from lo to hi inclusive with the given step. The number of
/// intervals is rounded to the nearest integer, so (hi - lo) should be an
/// integer multiple of step.
std::vector<double> uniform_grid(double lo, double hi, double step);

/// Spacing of a uniform grid with at least two points. Throws
/// ValidationError if the grid is too short, unsorted or non-uniform.
double grid_step_of(std::span<const double> grid);

/// True when two grids agree pointwise within a small absolute tolerance.
bool same_grid(std::span<const double> a, std::span<const double> b);

}  // namespace prcstomo
