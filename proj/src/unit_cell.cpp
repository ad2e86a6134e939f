#include "kelvopt/unit_cell.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "kelvopt/shape.hpp"

namespace kelvopt {

namespace {

// Vertex coordinates in the construction frame: all permutations of
// (0, +-1, +-2), one row per local node 1..24.
constexpr int kBase[24][3] = {
    {0, 1, -2},  {-1, 0, -2}, {0, -1, -2}, {1, 0, -2},  {0, 2, -1},
    {-2, 0, -1}, {0, -2, -1}, {2, 0, -1},  {1, 2, 0},   {-1, 2, 0},
    {-2, 1, 0},  {-2, -1, 0}, {-1, -2, 0}, {1, -2, 0},  {2, -1, 0},
    {2, 1, 0},   {0, 2, 1},   {-2, 0, 1},  {0, -2, 1},  {2, 0, 1},
    {0, 1, 2},   {-1, 0, 2},  {0, -1, 2},  {1, 0, 2},
};

}  // namespace

UnitCell unit_cell(double edge_len) {
  if (!(edge_len > 0.0))
    throw std::invalid_argument("unit_cell: edge_len must be positive");
  const double s2 = std::sqrt(2.0);
  UnitCell cell;
  cell.edge_len = edge_len;
  for (int i = 0; i < 24; ++i) {
    const double u = kBase[i][0], v = kBase[i][1], w = kBase[i][2];
    // Reorient so square faces normal to x become the stacking faces:
    // x = w, y = (u+v)/sqrt2, z = (v-u)/sqrt2 (a pure rotation).
    cell.master[i] = Vec3(w, (u + v) / s2, (v - u) / s2);
    cell.local[i] = cell.master[i] * (edge_len / s2);
  }
  return cell;
}

const std::vector<std::pair<int, int>>& UnitCell::edges() {
  static const std::vector<std::pair<int, int>> kEdges = [] {
    // Derive the edge set from the face cycles; every edge appears in
    // exactly two faces.
    const ShapeContext& ctx = shape_context();
    std::set<std::pair<int, int>> uniq;
    for (const Face& f : ctx.faces) {
      const int m = static_cast<int>(f.nodes.size());
      for (int t = 0; t < m; ++t) {
        int a = f.nodes[t], b = f.nodes[(t + 1) % m];
        uniq.insert({std::min(a, b), std::max(a, b)});
      }
    }
    return std::vector<std::pair<int, int>>(uniq.begin(), uniq.end());
  }();
  return kEdges;
}

}  // namespace kelvopt
