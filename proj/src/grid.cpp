#include "prcstomo/grid.hpp"

#include <cmath>
#include <cstddef>

#include "prcstomo/errors.hpp"

namespace prcstomo {

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("uniform_grid: step must be positive");
  if (!(hi > lo)) throw ValidationError("uniform_grid: hi must exceed lo");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

double grid_step_of(std::span<const double> grid) {
  if (grid.size() < 2) throw ValidationError("grid needs at least two points");
  const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  if (!(step > 0.0)) throw ValidationError("grid must be strictly ascending");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = grid.front() + static_cast<double>(i) * step;
    if (std::abs(grid[i] - expected) > 1e-9 * (1.0 + std::abs(expected)))
      throw ValidationError("grid is not uniformly spaced");
  }
  return step;
}

bool same_grid(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-9 * (1.0 + std::abs(a[i]))) return false;
  return true;
}

}  // namespace prcstomo
