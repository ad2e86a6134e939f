#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kelvopt/mesh.hpp"

namespace kelvopt {

/// Contents of a binary mesh dump. Node ids are converted back to 0-based
/// on read (the file stores 1-based ids).
struct MeshDump {
  GridSpec grid;
  std::vector<std::array<std::int64_t, 24>> conn;
  std::vector<Vec3> nodes;
};

/// Compact binary dump, little-endian:
///   int64 nx, ny, nz; float64 edge_len; int64 TE, TN;
///   then connectivity (TE x 24 int64, row-major, 1-based node ids);
///   then node coordinates (TN x 3 float64).
void write_mesh_binary(const Mesh& mesh, const std::string& path);
MeshDump read_mesh_binary(const std::string& path);

/// Legacy unstructured-grid text export with general-polyhedron cells; each
/// cell carries its 14 faces as explicit vertex loops. When `density` is
/// non-empty (size TE) it is attached as a cell scalar named "density";
/// elements with density <= `threshold` are dropped when threshold >= 0.
void write_mesh_vtk(const Mesh& mesh, const std::string& path,
                    const std::vector<double>& density = {},
                    double threshold = -1.0);

/// Nodal vector field export (legacy point data), e.g. displacements.
void write_point_field_vtk(const Mesh& mesh, const std::string& path,
                           const std::string& name,
                           const std::vector<double>& values_per_node3,
                           const std::vector<double>& density = {});

}  // namespace kelvopt
