#include "kelvopt/shape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kelvopt {

namespace {

constexpr double kOutsideTol = 1e-10;
constexpr double kNudge = 1e-12;

ShapeContext build_context() {
  const UnitCell cell = unit_cell(std::sqrt(2.0));
  const auto& X = cell.master;
  const double s2 = std::sqrt(2.0);
  const double s3 = std::sqrt(3.0);

  std::vector<Vec3> normals;
  normals.emplace_back(1, 0, 0);
  normals.emplace_back(-1, 0, 0);
  for (int sy : {1, -1})
    for (int sz : {1, -1}) normals.emplace_back(0, sy / s2, sz / s2);
  for (int sx : {1, -1}) {
    for (int sy : {1, -1}) normals.emplace_back(sx / s3, sy * s2 / s3, 0);
    for (int sz : {1, -1}) normals.emplace_back(sx / s3, 0, sz * s2 / s3);
  }

  ShapeContext ctx;
  for (std::size_t fi = 0; fi < normals.size(); ++fi) {
    Face f;
    f.normal = normals[fi];
    f.dist = -1e30;
    for (const Vec3& x : X) f.dist = std::max(f.dist, f.normal.dot(x));
    for (int i = 0; i < 24; ++i)
      if (std::abs(f.normal.dot(X[i]) - f.dist) < 1e-9) f.nodes.push_back(i);
    // order the cycle counter-clockwise around the outward normal
    Vec3 c = Vec3::Zero();
    for (int i : f.nodes) c += X[i];
    c /= static_cast<double>(f.nodes.size());
    Vec3 t1 = (X[f.nodes[0]] - c).normalized();
    Vec3 t2 = f.normal.cross(t1);
    std::sort(f.nodes.begin(), f.nodes.end(), [&](int a, int b) {
      return std::atan2((X[a] - c).dot(t2), (X[a] - c).dot(t1)) <
             std::atan2((X[b] - c).dot(t2), (X[b] - c).dot(t1));
    });
    f.area = 0.0;
    const int m = static_cast<int>(f.nodes.size());
    for (int t = 0; t < m; ++t)
      f.area += 0.5 * (X[f.nodes[t]] - c)
                          .cross(X[f.nodes[(t + 1) % m]] - c)
                          .norm();
    ctx.faces[fi] = std::move(f);
  }

  for (int I = 0; I < 24; ++I) {
    int ng = 0, nc = 0;
    for (int fi = 0; fi < 14; ++fi) {
      const auto& nodes = ctx.faces[fi].nodes;
      if (std::find(nodes.begin(), nodes.end(), I) != nodes.end())
        ctx.node_faces[I][ng++] = fi;
      else
        ctx.complement[I][nc++] = fi;
    }
    if (ng != 3)
      throw std::logic_error("shape_context: node not on exactly 3 faces");
  }
  return ctx;
}

// Plane distances h_F = dist - n.x, checked and floored away from zero.
std::array<double, 14> plane_distances(const ShapeContext& ctx,
                                       const Vec3& x) {
  std::array<double, 14> h;
  for (int fi = 0; fi < 14; ++fi) {
    h[fi] = ctx.faces[fi].dist - ctx.faces[fi].normal.dot(x);
    if (h[fi] < -kOutsideTol)
      throw std::invalid_argument("shape evaluation point outside element");
    h[fi] = std::max(h[fi], kNudge);
  }
  return h;
}

}  // namespace

const ShapeContext& shape_context() {
  static const ShapeContext ctx = build_context();
  return ctx;
}

Eigen::Matrix<double, 24, 1> shape_values(const ShapeContext& ctx,
                                          const Vec3& x) {
  const auto h = plane_distances(ctx, x);
  std::array<double, 14> r;
  for (int fi = 0; fi < 14; ++fi) r[fi] = ctx.faces[fi].area * h[fi] / 3.0;
  Eigen::Matrix<double, 24, 1> s;
  for (int I = 0; I < 24; ++I) {
    double p = 1.0;
    for (int fi : ctx.complement[I]) p *= r[fi];
    s[I] = p;
  }
  return s / s.sum();
}

Eigen::Matrix<double, 24, 3> shape_gradients(const ShapeContext& ctx,
                                             const Vec3& x) {
  const auto h = plane_distances(ctx, x);
  std::array<double, 14> r;
  for (int fi = 0; fi < 14; ++fi) r[fi] = ctx.faces[fi].area * h[fi] / 3.0;

  Eigen::Matrix<double, 24, 1> s;
  Eigen::Matrix<double, 24, 3> gs;
  for (int I = 0; I < 24; ++I) {
    double p = 1.0;
    Vec3 g = Vec3::Zero();
    // d r_F / dX = -(B_F/3) n_F, so d log s_I / dX = -sum n_F / h_F.
    for (int fi : ctx.complement[I]) {
      p *= r[fi];
      g -= ctx.faces[fi].normal / h[fi];
    }
    s[I] = p;
    gs.row(I) = (p * g).transpose();
  }
  const double S = s.sum();
  const Eigen::RowVector3d GS = gs.colwise().sum();
  Eigen::Matrix<double, 24, 3> out;
  for (int I = 0; I < 24; ++I)
    out.row(I) = (gs.row(I) - (s[I] / S) * GS) / S;
  return out;
}

}  // namespace kelvopt
