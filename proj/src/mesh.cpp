#include "kelvopt/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace kelvopt {

namespace {

// Local points 1..20 live on the four x-aligned edges of a cell's bounding
// box: five stations each on edges A (j, k+1), B (j+1, k+1), C (j, k) and
// D (j+1, k). Local point = edge base + station + 1.
constexpr int kEdgeBase[4] = {0, 5, 10, 15};          // A, B, C, D
constexpr int kEdgeCorner[4][2] = {{0, 1}, {1, 1}, {0, 0}, {1, 0}};

// Local node (1..24) -> local point (1..20). Eight nodes share a point with
// another node; kSecondSlot marks the ones that take the point's second
// hosted node when the point has two.
constexpr int kNodePoint[24] = {6, 1,  11, 16, 7,  2,  12, 17, 8,  8,  3,  3,
                                13, 13, 18, 18, 9,  4,  14, 19, 10, 5,  15, 20};
constexpr bool kSecondSlot[24] = {
    true,  true,  false, false, false, false, false, false,
    true,  false, false, true,  false, true,  true,  false,
    false, false, false, false, true,  true,  false, false};

struct PointGrid {
  std::int64_t px, py, pz;
  std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x + px * (y + py * z);
  }
};

}  // namespace

Mesh build_mesh(const GridSpec& grid) {
  grid.validate();
  const std::int64_t nx = grid.nx, ny = grid.ny, nz = grid.nz;
  const double l = grid.edge_len;
  const double s2 = std::sqrt(2.0);

  Mesh mesh;
  mesh.grid = grid;

  // Enumerate cells: row (j, k) holds nx - stagger cells, stagger = (j+k)%2.
  for (std::int64_t k = 0; k < nz; ++k) {
    for (std::int64_t j = 0; j < ny; ++j) {
      const std::int32_t s = static_cast<std::int32_t>((j + k) % 2);
      for (std::int64_t i = 0; i < nx - s; ++i) {
        mesh.cells.push_back({static_cast<std::int32_t>(i),
                              static_cast<std::int32_t>(j),
                              static_cast<std::int32_t>(k), s});
        mesh.centroids.emplace_back(s2 * l * static_cast<double>(2 * i + s),
                                    2.0 * l * static_cast<double>(j),
                                    2.0 * l * static_cast<double>(k));
      }
    }
  }
  const std::int64_t te = static_cast<std::int64_t>(mesh.cells.size());
  if (te != count_elements(grid)) {
    throw std::logic_error("build_mesh: element count mismatch");
  }

  const PointGrid pg{4 * nx + 1, ny + 1, nz + 1};
  const std::int64_t tp = pg.px * pg.py * pg.pz;

  auto cell_exists = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    if (j < 0 || j >= ny || k < 0 || k >= nz) return false;
    const std::int64_t s = (j + k) % 2;
    return i >= 0 && i < nx - s;
  };

  // Classify every candidate point by how many nodes it hosts (0, 1 or 2).
  // A point at odd px sits a quarter-pitch into some cell and hosts one node
  // iff any adjacent row covers it. A point at even px is either the middle
  // of a cell from the opposite-stagger rows (two nodes), or an end station
  // of cells from same-stagger rows: one node if all covering cells share a
  // (j, k) row, two if cells from different rows meet there.
  mesh.point_nodes.assign(static_cast<std::size_t>(tp), 0);
  for (std::int64_t z = 0; z < pg.pz; ++z) {
    for (std::int64_t y = 0; y < pg.py; ++y) {
      const std::int64_t rows[4][2] = {
          {y - 1, z - 1}, {y, z}, {y - 1, z}, {y, z - 1}};
      for (std::int64_t x = 0; x < pg.px; ++x) {
        std::uint8_t n = 0;
        if (x % 2 == 1) {
          for (std::int64_t x0 : {x - 1, x - 3}) {
            if (x0 < 0) continue;
            const std::int64_t s = (x0 % 4) / 2;
            const std::int64_t i = (x0 - 2 * s) / 4;
            for (const auto& jk : rows) {
              if ((jk[0] + jk[1]) % 2 == s && cell_exists(i, jk[0], jk[1])) {
                n = 1;
                break;
              }
            }
            if (n) break;
          }
        } else {
          const std::int64_t m = (x % 4) / 2;
          const std::int64_t sm = 1 - m;
          const std::int64_t x0m = x - 2;
          bool mid = false;
          if (x0m >= 0 && x0m % 4 == 2 * sm) {
            const std::int64_t i = (x0m - 2 * sm) / 4;
            for (const auto& jk : rows) {
              if ((jk[0] + jk[1]) % 2 == sm && cell_exists(i, jk[0], jk[1])) {
                mid = true;
                break;
              }
            }
          }
          if (mid) {
            n = 2;
          } else {
            int groups = 0;
            for (const auto& jk : rows) {
              if (jk[0] < 0 || jk[0] >= ny || jk[1] < 0 || jk[1] >= nz ||
                  (jk[0] + jk[1]) % 2 != m) {
                continue;
              }
              bool covers = false;
              for (std::int64_t x0 : {x - 4, x}) {
                if (x0 >= 0 && x0 % 4 == 2 * m &&
                    cell_exists((x0 - 2 * m) / 4, jk[0], jk[1])) {
                  covers = true;
                  break;
                }
              }
              if (covers && ++groups == 2) break;
            }
            n = static_cast<std::uint8_t>(groups);
          }
        }
        mesh.point_nodes[static_cast<std::size_t>(pg.index(x, y, z))] = n;
      }
    }
  }

  // Assign node ids in point order, first hosted node first.
  std::vector<std::array<std::int64_t, 2>> point_node_ids(
      static_cast<std::size_t>(tp), {-1, -1});
  std::int64_t tn = 0;
  for (std::int64_t g = 0; g < tp; ++g) {
    for (int s = 0; s < mesh.point_nodes[static_cast<std::size_t>(g)]; ++s) {
      point_node_ids[static_cast<std::size_t>(g)][s] = tn++;
    }
  }

  // Connectivity: map each element's local nodes through its 20 local
  // points, picking the second hosted node where the node table says so.
  const UnitCell cell = unit_cell(l);
  mesh.conn.resize(static_cast<std::size_t>(te));
  mesh.nodes.assign(static_cast<std::size_t>(tn), Vec3::Zero());
  std::vector<bool> placed(static_cast<std::size_t>(tn), false);
  for (std::int64_t e = 0; e < te; ++e) {
    const auto& c = mesh.cells[static_cast<std::size_t>(e)];
    const std::int64_t x0 = 4 * static_cast<std::int64_t>(c[0]) + 2 * c[3];
    std::int64_t ep[20];
    for (int edge = 0; edge < 4; ++edge) {
      for (int t = 0; t < 5; ++t) {
        ep[kEdgeBase[edge] + t] =
            pg.index(x0 + t, c[1] + kEdgeCorner[edge][0],
                     c[2] + kEdgeCorner[edge][1]);
      }
    }
    for (int ln = 0; ln < 24; ++ln) {
      const std::int64_t g = ep[kNodePoint[ln] - 1];
      const auto gs = static_cast<std::size_t>(g);
      const int slot =
          (mesh.point_nodes[gs] == 2 && kSecondSlot[ln]) ? 1 : 0;
      const std::int64_t node = point_node_ids[gs][slot];
      if (node < 0) {
        throw std::logic_error("build_mesh: element references an empty point");
      }
      mesh.conn[static_cast<std::size_t>(e)][static_cast<std::size_t>(ln)] =
          node;
      if (!placed[static_cast<std::size_t>(node)]) {
        mesh.nodes[static_cast<std::size_t>(node)] =
            mesh.centroids[static_cast<std::size_t>(e)] + cell.local[ln];
        placed[static_cast<std::size_t>(node)] = true;
      }
    }
  }
  for (bool p : placed) {
    if (!p) throw std::logic_error("build_mesh: unreferenced node id");
  }
  return mesh;
}

}  // namespace kelvopt
