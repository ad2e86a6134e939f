#include "kelvopt/quadrature.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "kelvopt/shape.hpp"

namespace kelvopt {

namespace {

// Volume and volume-weighted centroid of the tetrahedron (p0,p1,p2,p3).
double tet_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                  const Vec3& p3) {
  return std::abs((p1 - p0).cross(p2 - p0).dot(p3 - p0)) / 6.0;
}

}  // namespace

Quadrature quadrature(double edge_len, const UnitCell& cell) {
  if (!(edge_len > 0.0)) {
    throw std::invalid_argument("quadrature: edge_len must be positive");
  }
  const ShapeContext& ctx = shape_context();

  // Face centroids in local coordinates. Faces are squares and regular
  // hexagons, so the vertex mean is the exact area centroid.
  std::array<Vec3, 14> face_centroid;
  for (int f = 0; f < 14; ++f) {
    Vec3 c = Vec3::Zero();
    for (int n : ctx.faces[f].nodes) c += cell.local[n];
    face_centroid[f] = c / static_cast<double>(ctx.faces[f].nodes.size());
  }

  Quadrature q;
  const double exact_w =
      std::sqrt(2.0) * edge_len * edge_len * edge_len / 3.0;

  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

  for (int I = 0; I < 24; ++I) {
    const auto& gamma = ctx.node_faces[I];  // the node's 3 faces
    const Vec3 node = cell.local[I];

    // Midpoint of the edge shared by each pair of the node's faces. Two
    // adjacent faces meet in exactly one edge; its endpoints are the node
    // itself and one neighbor.
    Vec3 edge_mid[3][3];
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        const auto& fa = ctx.faces[gamma[a]].nodes;
        const auto& fb = ctx.faces[gamma[b]].nodes;
        int other = -1;
        for (int u : fa) {
          if (u == I) continue;
          for (int v : fb) {
            if (u == v) {
              other = u;
              break;
            }
          }
          if (other >= 0) break;
        }
        if (other < 0) {
          throw std::logic_error("quadrature: node faces do not share an edge");
        }
        edge_mid[a][b] = edge_mid[b][a] = 0.5 * (node + cell.local[other]);
      }
    }

    // The subregion is the hull of {element centroid, 3 face centroids,
    // 3 edge midpoints, node}. Split it into 6 tetrahedra, one per ordering
    // (a,b,c) of the node's faces:
    //   centroid -> centroid(face a) -> midpoint(edge a&b) -> node.
    double vol = 0.0;
    Vec3 cent = Vec3::Zero();
    for (const auto& p : perms) {
      const Vec3 p0 = Vec3::Zero();
      const Vec3 p1 = face_centroid[gamma[p[0]]];
      const Vec3 p2 = edge_mid[p[0]][p[1]];
      const Vec3 p3 = node;
      const double v = tet_volume(p0, p1, p2, p3);
      vol += v;
      cent += v * (p0 + p1 + p2 + p3) / 4.0;
    }
    if (std::abs(vol - exact_w) > 1e-12 * exact_w) {
      throw std::logic_error(
          "quadrature: subregion volume differs from sqrt(2)/3*a^3");
    }
    q.points[I] = cent / vol;
    q.weights[I] = exact_w;  // store the closed form; vol matches it above
  }
  return q;
}

}  // namespace kelvopt
