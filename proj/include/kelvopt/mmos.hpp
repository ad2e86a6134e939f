#pragma once

#include <string>
#include <vector>

#include "kelvopt/unit_cell.hpp"

namespace kelvopt {

/// A spheroidal negative mask. The focal points and the size offset d are
/// the 7 design variables; material is removed where the mask's level-set
///   phi(x) = |x - f1| + |x - f2| - |f1 - f2| - d
/// is negative.
struct Mask {
  Vec3 f1 = Vec3::Zero();
  Vec3 f2 = Vec3::Zero();
  double d = 0.0;

  double psi(int k) const;             // k in 0..6
  void set_psi(int k, double value);
};

/// Parameters of the density mapping.
struct MmosParams {
  double alpha = 3.0;    // logistic sharpness
  double epsilon = 0.0;  // denominator regularization; 0 = auto from domain
  double rho_min = 1e-4;
  double eta = 3.0;

  void validate() const;
};

double phi(const Mask& mask, const Vec3& x);

/// Spheroid semi-axes (a, b): a = (|f1-f2| + d)/2, b = sqrt((2a - d/2) d/2).
/// Returns (0, 0) for a vanished mask (d < 0).
std::pair<double, double> semi_axes(const Mask& mask);

/// Logistic mask contribution h(x) = 1/(1 + exp(-alpha*phi)) in (0,1).
double mask_value(const Mask& mask, const Vec3& x, const MmosParams& params);

/// Element densities rho_i = prod_J h_J(x_i) at the given centroids. The
/// empty mask list yields all ones. Products switch to log space above 64
/// masks to avoid underflow.
std::vector<double> density(const std::vector<Mask>& masks,
                            const std::vector<Vec3>& centroids,
                            const MmosParams& params);

/// Chain-rule product: given dI/drho per element, return the gradient of I
/// over all 7*TM design variables (mask-major: J*7 + k). Every distance
/// denominator is regularized by params.epsilon (resolved against the
/// centroid cloud when epsilon == 0).
std::vector<double> density_jacobian_product(const std::vector<Mask>& masks,
                                             const std::vector<Vec3>& centroids,
                                             const MmosParams& params,
                                             const std::vector<double>& dI_drho);

/// Plain-text mask set: one line per mask, 7 decimal fields psi1..psi7.
void write_masks(const std::vector<Mask>& masks, const std::string& path);
std::vector<Mask> read_masks(const std::string& path);

/// Effective epsilon: the configured value, or 1e-8 times the diagonal of
/// the centroid bounding box when the configured value is zero.
double resolve_epsilon(const MmosParams& params,
                       const std::vector<Vec3>& centroids);

}  // namespace kelvopt
