#pragma once

#include <Eigen/Dense>

#include "kelvopt/material.hpp"
#include "kelvopt/quadrature.hpp"
#include "kelvopt/unit_cell.hpp"

namespace kelvopt {

using Mat72 = Eigen::Matrix<double, 72, 72>;
using MatB = Eigen::Matrix<double, 6, 72>;

/// Everything an analysis needs about the (single, shared) reference
/// element: every cell in a lattice is a translate of the same truncated
/// octahedron, so the stiffness matrix is computed once.
struct Element {
  UnitCell cell;
  Quadrature quad;
  Material material;
  Mat72 k0;  // reference stiffness, node-major DOFs (dof = 3*node + comp)

  Element(double edge_len, const Material& mat);
};

/// Strain-displacement matrix for one evaluation point given the 24 shape
/// gradients (rows). Voigt order (xx, yy, zz, yz, xz, xy), engineering shear.
MatB strain_matrix(const Eigen::Matrix<double, 24, 3>& grads);

}  // namespace kelvopt
