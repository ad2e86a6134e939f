#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <vector>

namespace kelvopt {

using Vec3 = Eigen::Vector3d;

/// The 24 vertices of one truncated-octahedron element, in the orientation
/// used by the lattice (x along the stacking axis). `master` holds the
/// canonical coordinates with edge length sqrt(2); `local` is scaled so all
/// edges have length `edge_len`.
struct UnitCell {
  double edge_len = 0.0;
  std::array<Vec3, 24> master;  // edge length sqrt(2)
  std::array<Vec3, 24> local;   // edge length edge_len

  /// All 36 undirected edges as pairs of local node indices (0-based).
  static const std::vector<std::pair<int, int>>& edges();
};

/// Build the unit cell for a given physical edge length.
/// Throws std::invalid_argument if edge_len <= 0.
UnitCell unit_cell(double edge_len);

}  // namespace kelvopt
