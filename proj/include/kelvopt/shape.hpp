#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "kelvopt/unit_cell.hpp"

namespace kelvopt {

/// One face of the master element: outward unit normal, signed plane
/// distance (n.x = dist on the face), area, and the vertex cycle.
struct Face {
  Vec3 normal;
  double dist = 0.0;
  double area = 0.0;
  std::vector<int> nodes;  // 0-based local node indices, ordered around normal
};

/// Immutable geometric context for Wachspress shape-function evaluation on
/// the master element (edge length sqrt(2)): the 14 faces, and for every
/// node the 3 faces containing it plus the 11-face complement.
struct ShapeContext {
  std::array<Face, 14> faces;
  std::array<std::array<int, 3>, 24> node_faces;
  std::array<std::array<int, 11>, 24> complement;
};

/// The context for the canonical master element (built once, shared).
const ShapeContext& shape_context();

/// Wachspress shape functions at a point strictly inside the master
/// element. Each N^I is the product of the scaled plane distances of the
/// faces not containing node I, normalized to a partition of unity.
/// Throws std::invalid_argument if x lies outside any face plane by more
/// than a small tolerance; points within the tolerance band are nudged
/// inward.
Eigen::Matrix<double, 24, 1> shape_values(const ShapeContext& ctx,
                                          const Vec3& x);

/// Gradients of the shape functions with respect to the master
/// coordinates, one row per node.
Eigen::Matrix<double, 24, 3> shape_gradients(const ShapeContext& ctx,
                                             const Vec3& x);

}  // namespace kelvopt
