#pragma once

#include <cstdint>
#include <stdexcept>

namespace kelvopt {

/// Dimensions of a regular truncated-octahedron lattice over a cuboidal
/// domain: cell counts per axis and the physical edge length of every
/// element.
struct GridSpec {
  int nx = 1;
  int ny = 1;
  int nz = 1;
  double edge_len = 1.0;

  void validate() const {
    if (nx < 1 || ny < 1 || nz < 1)
      throw std::invalid_argument("grid: nx, ny, nz must be >= 1");
    if (!(edge_len > 0.0))
      throw std::invalid_argument("grid: edge_len must be positive");
  }
};

/// Total number of elements. Rows of cells alternate between nx ("regular")
/// and nx-1 ("conjugate") cells depending on the parity of j+k.
std::int64_t count_elements(const GridSpec& spec);

/// Total number of mesh-space points, (4nx+1)(ny+1)(nz+1).
std::int64_t count_points(const GridSpec& spec);

}  // namespace kelvopt
