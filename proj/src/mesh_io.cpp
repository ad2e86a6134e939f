#include "kelvopt/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "kelvopt/shape.hpp"

namespace kelvopt {

namespace {

void write_raw(std::ofstream& os, const void* data, std::size_t bytes) {
  os.write(static_cast<const char*>(data),
           static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& is, void* data, std::size_t bytes) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!is) throw std::runtime_error("mesh dump: truncated file");
}

}  // namespace

void write_mesh_binary(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);

  const std::int64_t header_i[3] = {mesh.grid.nx, mesh.grid.ny, mesh.grid.nz};
  const double l = mesh.grid.edge_len;
  const std::int64_t counts[2] = {mesh.num_elements(), mesh.num_nodes()};
  write_raw(os, header_i, sizeof(header_i));
  write_raw(os, &l, sizeof(l));
  write_raw(os, counts, sizeof(counts));

  for (const auto& row : mesh.conn) {
    std::int64_t out[24];
    for (int i = 0; i < 24; ++i) out[i] = row[i] + 1;  // 1-based on disk
    write_raw(os, out, sizeof(out));
  }
  for (const Vec3& x : mesh.nodes) {
    const double xyz[3] = {x.x(), x.y(), x.z()};
    write_raw(os, xyz, sizeof(xyz));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

MeshDump read_mesh_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);

  std::int64_t header_i[3];
  double l = 0.0;
  std::int64_t counts[2];
  read_raw(is, header_i, sizeof(header_i));
  read_raw(is, &l, sizeof(l));
  read_raw(is, counts, sizeof(counts));

  MeshDump dump;
  dump.grid.nx = static_cast<int>(header_i[0]);
  dump.grid.ny = static_cast<int>(header_i[1]);
  dump.grid.nz = static_cast<int>(header_i[2]);
  dump.grid.edge_len = l;
  dump.grid.validate();
  const std::int64_t te = counts[0], tn = counts[1];
  if (te < 1 || tn < 24) throw std::runtime_error("mesh dump: bad counts");

  dump.conn.resize(static_cast<std::size_t>(te));
  for (auto& row : dump.conn) {
    std::int64_t in[24];
    read_raw(is, in, sizeof(in));
    for (int i = 0; i < 24; ++i) {
      if (in[i] < 1 || in[i] > tn)
        throw std::runtime_error("mesh dump: node id out of range");
      row[i] = in[i] - 1;
    }
  }
  dump.nodes.resize(static_cast<std::size_t>(tn));
  for (Vec3& x : dump.nodes) {
    double xyz[3];
    read_raw(is, xyz, sizeof(xyz));
    x = Vec3(xyz[0], xyz[1], xyz[2]);
  }
  return dump;
}

void write_mesh_vtk(const Mesh& mesh, const std::string& path,
                    const std::vector<double>& density, double threshold) {
  if (!density.empty() &&
      density.size() != static_cast<std::size_t>(mesh.num_elements())) {
    throw std::invalid_argument("vtk export: density size != element count");
  }
  std::vector<std::int64_t> keep;
  keep.reserve(mesh.conn.size());
  for (std::int64_t e = 0; e < mesh.num_elements(); ++e) {
    if (threshold >= 0.0 && !density.empty() &&
        density[static_cast<std::size_t>(e)] <= threshold) {
      continue;
    }
    keep.push_back(e);
  }

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "# vtk DataFile Version 3.0\n"
     << "truncated-octahedron lattice\n"
     << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  os << "POINTS " << mesh.num_nodes() << " double\n";
  char buf[96];
  for (const Vec3& x : mesh.nodes) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", x.x(), x.y(),
                  x.z());
    os << buf;
  }

  // Face stream per polyhedron cell: nFaces, then (nPts, ids...) per face.
  // 14 faces = 6 squares + 8 hexagons -> 1 + 6*5 + 8*7 = 87 ints per cell.
  const ShapeContext& ctx = shape_context();
  std::int64_t stream_ints = 0;
  for (const Face& f : ctx.faces) {
    stream_ints += 1 + static_cast<std::int64_t>(f.nodes.size());
  }
  const std::int64_t cell_ints = 1 + stream_ints;

  os << "CELLS " << keep.size() << ' '
     << static_cast<std::int64_t>(keep.size()) * (cell_ints + 1) << '\n';
  for (std::int64_t e : keep) {
    const auto& c = mesh.conn[static_cast<std::size_t>(e)];
    os << cell_ints << ' ' << ctx.faces.size();
    for (const Face& f : ctx.faces) {
      os << ' ' << f.nodes.size();
      for (int ln : f.nodes) os << ' ' << c[static_cast<std::size_t>(ln)];
    }
    os << '\n';
  }
  os << "CELL_TYPES " << keep.size() << '\n';
  for (std::size_t i = 0; i < keep.size(); ++i) os << "42\n";

  if (!density.empty()) {
    os << "CELL_DATA " << keep.size() << '\n'
       << "SCALARS density double 1\nLOOKUP_TABLE default\n";
    for (std::int64_t e : keep) {
      std::snprintf(buf, sizeof(buf), "%.17g\n",
                    density[static_cast<std::size_t>(e)]);
      os << buf;
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_point_field_vtk(const Mesh& mesh, const std::string& path,
                           const std::string& name,
                           const std::vector<double>& values_per_node3,
                           const std::vector<double>& density) {
  if (values_per_node3.size() !=
      static_cast<std::size_t>(3 * mesh.num_nodes())) {
    throw std::invalid_argument("vtk export: field size != 3*node count");
  }
  write_mesh_vtk(mesh, path, density);
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot open for appending: " + path);
  os << "POINT_DATA " << mesh.num_nodes() << '\n'
     << "VECTORS " << name << " double\n";
  char buf[96];
  for (std::int64_t n = 0; n < mesh.num_nodes(); ++n) {
    const auto i = static_cast<std::size_t>(3 * n);
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", values_per_node3[i],
                  values_per_node3[i + 1], values_per_node3[i + 2]);
    os << buf;
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace kelvopt
