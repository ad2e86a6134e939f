#include "kelvopt/element.hpp"

#include <cmath>

#include "kelvopt/shape.hpp"

namespace kelvopt {

MatB strain_matrix(const Eigen::Matrix<double, 24, 3>& grads) {
  MatB b = MatB::Zero();
  for (int I = 0; I < 24; ++I) {
    const double gx = grads(I, 0), gy = grads(I, 1), gz = grads(I, 2);
    const int c = 3 * I;
    b(0, c + 0) = gx;
    b(1, c + 1) = gy;
    b(2, c + 2) = gz;
    b(3, c + 1) = gz;
    b(3, c + 2) = gy;
    b(4, c + 0) = gz;
    b(4, c + 2) = gx;
    b(5, c + 0) = gy;
    b(5, c + 1) = gx;
  }
  return b;
}

Element::Element(double edge_len, const Material& mat)
    : cell(unit_cell(edge_len)),
      quad(quadrature(edge_len, cell)),
      material(mat) {
  const ShapeContext& ctx = shape_context();
  const Mat6 d = material.d_matrix();
  // Shape functions live on the master element (edge length sqrt(2));
  // physical coordinates are master * (edge_len/sqrt(2)), so gradients pick
  // up the inverse factor.
  const double to_master = std::sqrt(2.0) / edge_len;
  k0.setZero();
  for (int qp = 0; qp < 24; ++qp) {
    const Eigen::Matrix<double, 24, 3> grads =
        shape_gradients(ctx, quad.points[qp] * to_master) * to_master;
    const MatB b = strain_matrix(grads);
    k0.noalias() += quad.weights[qp] * b.transpose() * d * b;
  }
  // Enforce exact symmetry (the analytic expression is symmetric; floating
  // point accumulation is not).
  k0 = (0.5 * (k0 + k0.transpose())).eval();
}

}  // namespace kelvopt
