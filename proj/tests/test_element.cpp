#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "kelvopt/element.hpp"
#include "kelvopt/shape.hpp"

using namespace kelvopt;

TEST_SUITE("element") {

TEST_CASE("quadrature weights are equal and sum to the cell volume") {
  for (double l : {0.25, 0.5, 1.0, 1.7}) {
    const UnitCell cell = unit_cell(l);
    const Quadrature q = quadrature(l, cell);
    const double volume = 8.0 * std::sqrt(2.0) * l * l * l;
    const double w_expect = std::sqrt(2.0) * l * l * l / 3.0;
    double sum = 0.0;
    for (double w : q.weights) {
      CHECK(w == doctest::Approx(w_expect).epsilon(1e-13));
      sum += w;
    }
    CHECK(sum == doctest::Approx(volume).epsilon(1e-12));
  }
}

TEST_CASE("quadrature points lie strictly inside the cell") {
  const double l = 0.8;
  const UnitCell cell = unit_cell(l);
  const Quadrature q = quadrature(l, cell);
  // Faces of the scaled cell: squares at distance sqrt(2)l (normals +-x and
  // the four (0,+-1,+-1)/sqrt(2)), hexagons at distance sqrt(3)l.
  const double rsq = std::sqrt(2.0) * l;
  const double rhex = std::sqrt(3.0) * l;
  for (const Vec3& p : q.points) {
    CHECK(std::abs(p.x()) < rsq);
    CHECK(std::abs((p.y() + p.z()) / std::sqrt(2.0)) < rsq);
    CHECK(std::abs((p.y() - p.z()) / std::sqrt(2.0)) < rsq);
    for (double sy : {-1.0, 1.0})
      for (double sz : {-1.0, 1.0}) {
        const Vec3 n = Vec3(1.0, sy, sz) / std::sqrt(3.0);
        CHECK(std::abs(n.dot(p)) < rhex);
        const Vec3 m = Vec3(-1.0, sy, sz) / std::sqrt(3.0);
        CHECK(std::abs(m.dot(p)) < rhex);
      }
  }
}

TEST_CASE("quadrature integrates linears exactly") {
  const double l = 0.6;
  const UnitCell cell = unit_cell(l);
  const Quadrature q = quadrature(l, cell);
  // Integral of (x, y, z) over a centro-symmetric cell centred at 0 is 0.
  Vec3 first = Vec3::Zero();
  for (int i = 0; i < 24; ++i) first += q.weights[i] * q.points[i];
  CHECK(first.norm() <= 1e-12 * 8.0 * std::sqrt(2.0) * l * l * l);
}

TEST_CASE("stiffness matrix is symmetric") {
  const Element e(0.5, Material::from_lame(10.0, 10.0));
  const double scale = e.k0.cwiseAbs().maxCoeff();
  CHECK((e.k0 - e.k0.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("stiffness matrix is PSD with exactly six rigid-body modes") {
  const Element e(0.5, Material::from_lame(12.0, 7.0));
  Eigen::SelfAdjointEigenSolver<Mat72> es(e.k0);
  const auto& ev = es.eigenvalues();
  const double lmax = ev(71);
  CHECK(lmax > 0.0);
  for (int i = 0; i < 72; ++i) CHECK(ev(i) >= -1e-10 * lmax);
  int nearly_zero = 0;
  for (int i = 0; i < 72; ++i)
    if (std::abs(ev(i)) < 1e-8 * lmax) ++nearly_zero;
  CHECK(nearly_zero == 6);
}

TEST_CASE("rigid translations and linearized rotations are in the kernel") {
  const Element e(0.7, Material::from_lame(10.0, 10.0));
  const double knorm = e.k0.cwiseAbs().maxCoeff();
  // Translations.
  for (int c = 0; c < 3; ++c) {
    Eigen::Matrix<double, 72, 1> u = Eigen::Matrix<double, 72, 1>::Zero();
    for (int n = 0; n < 24; ++n) u(3 * n + c) = 1.0;
    CHECK((e.k0 * u).cwiseAbs().maxCoeff() <= 1e-10 * knorm);
  }
  // Rotations u = w x X about each axis.
  for (int c = 0; c < 3; ++c) {
    Vec3 w = Vec3::Zero();
    w[c] = 1.0;
    Eigen::Matrix<double, 72, 1> u;
    for (int n = 0; n < 24; ++n) u.segment<3>(3 * n) = w.cross(e.cell.local[n]);
    CHECK((e.k0 * u).cwiseAbs().maxCoeff() <= 1e-10 * knorm);
  }
}

TEST_CASE("stiffness scales linearly with edge length") {
  // K ~ integral B^T D B dV: B ~ 1/l, dV ~ l^3, so K ~ l.
  const Material mat = Material::from_lame(10.0, 10.0);
  const Element e1(0.5, mat);
  const Element e2(1.0, mat);
  CHECK((e2.k0 - 2.0 * e1.k0).cwiseAbs().maxCoeff() <=
        1e-10 * e2.k0.cwiseAbs().maxCoeff());
}

TEST_CASE("constitutive matrix has the isotropic structure") {
  const Material m = Material::from_lame(5.0, 2.0);
  const Mat6 d = m.d_matrix();
  for (int i = 0; i < 3; ++i) {
    CHECK(d(i, i) == doctest::Approx(5.0 + 2.0 * 2.0));
    CHECK(d(i + 3, i + 3) == doctest::Approx(2.0));
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(d(i, j) == doctest::Approx(5.0));
  }
  CHECK(d.bottomLeftCorner<3, 3>().cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.topRightCorner<3, 3>().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("youngs/poisson conversion round-trips through lame constants") {
  const double E = 25.0, nu = 0.3;
  const Material m = Material::from_youngs(E, nu);
  CHECK(m.lambda ==
        doctest::Approx(E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))).epsilon(1e-14));
  CHECK(m.mu == doctest::Approx(E / (2.0 * (1.0 + nu))).epsilon(1e-14));
}

TEST_CASE("simp interpolation and derivative") {
  const Simp s{3.0, 1e-4};
  CHECK(s.scale(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.scale(0.0) == doctest::Approx(1e-4).epsilon(1e-15));
  const double rho = 0.37;
  CHECK(s.scale(rho) ==
        doctest::Approx(rho * rho * rho * (1.0 - 1e-4) + 1e-4).epsilon(1e-14));
  CHECK(s.dscale(rho) ==
        doctest::Approx(3.0 * rho * rho * (1.0 - 1e-4)).epsilon(1e-14));
}

TEST_CASE("strain matrix maps a linear field to the exact strain") {
  // For u = A x (A constant 3x3), the strain at any point is sym(A). With
  // linear-complete shape functions, B * u_nodes must reproduce it exactly
  // at every quadrature point.
  const Element e(0.9, Material::from_lame(10.0, 10.0));
  Eigen::Matrix3d A;
  A << 0.1, 0.3, -0.2, 0.05, -0.15, 0.25, -0.1, 0.2, 0.3;
  const Eigen::Matrix3d sym = 0.5 * (A + A.transpose());
  Eigen::Matrix<double, 6, 1> exact;
  exact << sym(0, 0), sym(1, 1), sym(2, 2), 2.0 * sym(1, 2), 2.0 * sym(0, 2),
      2.0 * sym(0, 1);
  Eigen::Matrix<double, 72, 1> u;
  for (int n = 0; n < 24; ++n) u.segment<3>(3 * n) = A * e.cell.local[n];

  const ShapeContext& ctx = shape_context();
  const double map = e.cell.edge_len / std::sqrt(2.0);  // local = map * master
  for (int gp = 0; gp < 24; ++gp) {
    const Vec3 xm = e.quad.points[gp] / map;
    Eigen::Matrix<double, 24, 3> g = shape_gradients(ctx, xm) / map;
    const MatB b = strain_matrix(g);
    const Eigen::Matrix<double, 6, 1> strain = b * u;
    CHECK((strain - exact).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

}  // TEST_SUITE
