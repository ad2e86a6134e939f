#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "kelvopt/element.hpp"
#include "kelvopt/mesh.hpp"

namespace kelvopt {

/// Dirichlet fixings (homogeneous) and point loads on global DOFs
/// (dof = 3*node + component).
struct BoundaryConditions {
  std::vector<std::int64_t> fixed_dofs;
  std::vector<std::pair<std::int64_t, double>> loads;

  /// Checks index ranges, disjointness of fixed/loaded sets, and that at
  /// least 6 DOFs are fixed.
  void validate(std::int64_t ndof) const;
};

struct PcgSettings {
  double rel_tol = 1e-6;
  std::int64_t max_iter = 100000;
};

struct PcgResult {
  std::int64_t iterations = 0;
  double rel_residual = 0.0;  // true residual of the returned solution
  bool converged = false;
};

/// Matrix-free system assembled from one shared element stiffness: gathers
/// element displacements through the connectivity, applies scale_e * K0,
/// and scatters. Elements are partitioned into 8 independent colors (parity
/// of the lattice indices) so the scatter is race-free in parallel.
class FemSystem {
 public:
  FemSystem(const Mesh& mesh, const Element& element);

  std::int64_t ndof() const { return ndof_; }
  std::int64_t num_elements() const { return num_elements_; }
  const Mat72& k0() const { return k0_; }
  double element_volume() const { return element_volume_; }

  void set_bc(const BoundaryConditions& bc);
  const std::vector<double>& load_vector() const { return load_; }
  const std::vector<std::uint8_t>& fixed() const { return fixed_; }

  /// y = K(scale) u with no boundary-condition handling; scale holds the
  /// SIMP-scaled density per element.
  void apply_stiffness(const std::vector<double>& scale,
                       const std::vector<double>& u,
                       std::vector<double>& y) const;

  /// Density-weighted assembled diagonal; 1.0 on fixed DOFs.
  std::vector<double> build_preconditioner(
      const std::vector<double>& scale) const;

  /// Preconditioned CG on the free DOFs, warm-started from u. Residual
  /// smoothing keeps the preconditioned residual norm non-increasing; when
  /// `history` is given it receives that norm per iteration. Throws on
  /// numerical breakdown; an iteration-cap hit is reported via
  /// PcgResult::converged = false.
  PcgResult pcg_solve(const std::vector<double>& scale,
                      const std::vector<double>& f, const PcgSettings& settings,
                      std::vector<double>& u,
                      std::vector<double>* history = nullptr) const;

  /// Compliance I = 1/2 u.F and its density gradient
  /// dI/drho_e = -1/2 * dscale(rho_e) * ue.K0.ue (non-positive).
  std::pair<double, std::vector<double>> compliance_and_gradient(
      const std::vector<double>& rho, const Simp& simp,
      const std::vector<double>& u, const std::vector<double>& f) const;

 private:
  std::int64_t num_elements_ = 0;
  std::int64_t ndof_ = 0;
  double element_volume_ = 0.0;
  Mat72 k0_;
  Eigen::Matrix<double, 72, 1> k0_diag_;
  std::vector<std::int64_t> dofmap_;            // num_elements x 72, row-major
  std::array<std::vector<std::int64_t>, 8> colors_;
  std::vector<std::uint8_t> fixed_;
  std::vector<double> load_;
};

}  // namespace kelvopt
