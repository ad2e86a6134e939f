#include "kelvopt/material.hpp"

#include <cmath>
#include <stdexcept>

namespace kelvopt {

Material Material::from_lame(double lambda, double mu) {
  if (!(mu > 0.0) || lambda < 0.0) {
    throw std::invalid_argument("Material: need mu > 0 and lambda >= 0");
  }
  return Material{lambda, mu};
}

Material Material::from_youngs(double E, double nu) {
  if (!(E > 0.0) || !(nu > -1.0) || !(nu < 0.5)) {
    throw std::invalid_argument("Material: need E > 0 and -1 < nu < 0.5");
  }
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  return Material{lambda, mu};
}

Mat6 Material::d_matrix() const {
  Mat6 d = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) d(i, j) = lambda;
    d(i, i) = lambda + 2.0 * mu;
    d(i + 3, i + 3) = mu;
  }
  return d;
}

double Simp::scale(double rho) const {
  return std::pow(rho, eta) * (1.0 - rho_min) + rho_min;
}

double Simp::dscale(double rho) const {
  return eta * std::pow(rho, eta - 1.0) * (1.0 - rho_min);
}

}  // namespace kelvopt
