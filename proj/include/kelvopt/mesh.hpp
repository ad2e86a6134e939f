#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kelvopt/grid.hpp"
#include "kelvopt/unit_cell.hpp"

namespace kelvopt {

/// A regular lattice of truncated-octahedron elements filling a cuboid.
///
/// Elements are arranged in (nx or nx-1)-long rows indexed by (j, k); rows
/// with (j+k) odd are staggered half a cell in x. Node ids are 0-based in
/// memory and assigned in candidate-point order (x fastest, then y, then z),
/// with a point's first hosted node numbered before its second.
struct Mesh {
  GridSpec grid;
  std::vector<std::array<std::int32_t, 4>> cells;  // (i, j, k, stagger)
  std::vector<std::array<std::int64_t, 24>> conn;  // 0-based global node ids
  std::vector<Vec3> centroids;                     // element centroids
  std::vector<Vec3> nodes;                         // node coordinates
  std::vector<std::uint8_t> point_nodes;           // hosted nodes per grid point

  std::int64_t num_elements() const {
    return static_cast<std::int64_t>(conn.size());
  }
  std::int64_t num_nodes() const {
    return static_cast<std::int64_t>(nodes.size());
  }
  std::int64_t num_points() const {
    return static_cast<std::int64_t>(point_nodes.size());
  }
};

/// Build the full mesh for a grid. Throws std::invalid_argument on a bad
/// grid spec.
Mesh build_mesh(const GridSpec& grid);

}  // namespace kelvopt
