#pragma once

#include <array>

#include "kelvopt/unit_cell.hpp"

namespace kelvopt {

/// The 24-point nodal-subregion integration rule: one point per node, at
/// the volume centroid of the node's subregion (the hull of the node, the
/// midpoints of its 3 edges, the centroids of its 3 faces, and the element
/// centroid). All weights are equal and the rule integrates constants and
/// linears exactly.
struct Quadrature {
  std::array<Vec3, 24> points;    // physical offsets from the element centroid
  std::array<double, 24> weights; // each sqrt(2)*edge_len^3/3
};

/// Build the rule for a given cell. Throws if cell.edge_len <= 0.
Quadrature quadrature(double edge_len, const UnitCell& cell);

}  // namespace kelvopt
