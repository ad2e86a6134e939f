#include "kelvopt/grid.hpp"

namespace kelvopt {

std::int64_t count_elements(const GridSpec& spec) {
  spec.validate();
  const std::int64_t nx = spec.nx, ny = spec.ny, nz = spec.nz;
  // Closed form: rows with (j+k) even hold nx cells, odd rows nx-1.
  // Equivalent to (2nx-1)*ny*(nz/2) + ((2nx-1)*(ny/2) + nx*(ny%2))*(nz%2)
  // with integer division.
  return (2 * nx - 1) * ny * (nz / 2) +
         ((2 * nx - 1) * (ny / 2) + nx * (ny % 2)) * (nz % 2);
}

std::int64_t count_points(const GridSpec& spec) {
  spec.validate();
  return (4 * static_cast<std::int64_t>(spec.nx) + 1) * (spec.ny + 1) *
         (spec.nz + 1);
}

}  // namespace kelvopt
