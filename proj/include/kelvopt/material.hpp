#pragma once

#include <Eigen/Dense>

namespace kelvopt {

using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Isotropic linear-elastic material given by the Lame parameters.
struct Material {
  double lambda = 10.0;
  double mu = 10.0;

  static Material from_lame(double lambda, double mu);
  static Material from_youngs(double E, double nu);

  /// Constitutive matrix in Voigt order (xx, yy, zz, yz, xz, xy) with
  /// engineering shear strains.
  Mat6 d_matrix() const;
};

/// Power-law stiffness interpolation with an ersatz floor:
///   scale(rho) = rho^eta * (1 - rho_min) + rho_min.
struct Simp {
  double eta = 3.0;
  double rho_min = 1e-4;

  double scale(double rho) const;
  double dscale(double rho) const;  // d(scale)/d(rho)
};

}  // namespace kelvopt
