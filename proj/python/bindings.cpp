#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kelvopt/config.hpp"
#include "kelvopt/mesh_io.hpp"
#include "kelvopt/shape.hpp"

namespace py = pybind11;
using namespace kelvopt;

namespace {

Eigen::MatrixXd vec3s_to_matrix(const std::vector<Vec3>& v) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
  return out;
}

std::vector<Vec3> matrix_to_vec3s(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.cols() != 3) throw std::invalid_argument("expected an (N,3) array");
  std::vector<Vec3> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m.row(i);
  return out;
}

}  // namespace

PYBIND11_MODULE(_kelvopt, m) {
  m.doc() = "Topology optimization on truncated-octahedron lattices";

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init([](int nx, int ny, int nz, double edge_len) {
             GridSpec g{nx, ny, nz, edge_len};
             g.validate();
             return g;
           }),
           py::arg("nx"), py::arg("ny"), py::arg("nz"),
           py::arg("edge_len") = 1.0)
      .def_readonly("nx", &GridSpec::nx)
      .def_readonly("ny", &GridSpec::ny)
      .def_readonly("nz", &GridSpec::nz)
      .def_readonly("edge_len", &GridSpec::edge_len);

  m.def("count_elements", &count_elements, py::arg("grid"),
        "Number of elements of the lattice over the given grid.");
  m.def("count_points", &count_points, py::arg("grid"),
        "Number of candidate mesh-space points of the grid.");

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("num_elements", &Mesh::num_elements)
      .def_property_readonly("num_nodes", &Mesh::num_nodes)
      .def_property_readonly("num_points", &Mesh::num_points)
      .def_property_readonly("grid", [](const Mesh& mesh) { return mesh.grid; })
      .def("connectivity",
           [](const Mesh& mesh) {
             Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> c(
                 mesh.num_elements(), 24);
             for (std::int64_t e = 0; e < mesh.num_elements(); ++e)
               for (int i = 0; i < 24; ++i)
                 c(e, i) = mesh.conn[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)];
             return c;
           },
           "0-based (TE, 24) global node ids.")
      .def("centroids",
           [](const Mesh& mesh) { return vec3s_to_matrix(mesh.centroids); })
      .def("nodes", [](const Mesh& mesh) { return vec3s_to_matrix(mesh.nodes); });

  m.def("build_mesh", &build_mesh, py::arg("grid"),
        "Build the full lattice mesh for the grid.");
  m.def("write_mesh_binary", &write_mesh_binary, py::arg("mesh"),
        py::arg("path"));
  m.def("write_mesh_vtk", &write_mesh_vtk, py::arg("mesh"), py::arg("path"),
        py::arg("density") = std::vector<double>{},
        py::arg("threshold") = -1.0);

  py::class_<Material>(m, "Material")
      .def(py::init([](double lambda, double mu) {
             return Material::from_lame(lambda, mu);
           }),
           py::arg("lambda_") = 10.0, py::arg("mu") = 10.0)
      .def_readonly("lambda_", &Material::lambda)
      .def_readonly("mu", &Material::mu)
      .def("d_matrix", &Material::d_matrix);

  py::class_<Element>(m, "Element")
      .def(py::init<double, const Material&>(), py::arg("edge_len"),
           py::arg("material") = Material{})
      .def_property_readonly("k0",
                             [](const Element& e) -> Eigen::MatrixXd {
                               return e.k0;
                             })
      .def_property_readonly("quad_weights", [](const Element& e) {
        return std::vector<double>(e.quad.weights.begin(),
                                   e.quad.weights.end());
      });

  py::class_<Mask>(m, "Mask")
      .def(py::init([](const Vec3& f1, const Vec3& f2, double d) {
             Mask mask;
             mask.f1 = f1;
             mask.f2 = f2;
             mask.d = d;
             return mask;
           }),
           py::arg("f1"), py::arg("f2"), py::arg("d"))
      .def_readwrite("f1", &Mask::f1)
      .def_readwrite("f2", &Mask::f2)
      .def_readwrite("d", &Mask::d);

  py::class_<MmosParams>(m, "MmosParams")
      .def(py::init([](double alpha, double epsilon, double rho_min,
                       double eta) {
             MmosParams p{alpha, epsilon, rho_min, eta};
             p.validate();
             return p;
           }),
           py::arg("alpha") = 3.0, py::arg("epsilon") = 0.0,
           py::arg("rho_min") = 1e-4, py::arg("eta") = 3.0)
      .def_readonly("alpha", &MmosParams::alpha)
      .def_readonly("epsilon", &MmosParams::epsilon)
      .def_readonly("rho_min", &MmosParams::rho_min)
      .def_readonly("eta", &MmosParams::eta);

  m.def("phi", &phi, py::arg("mask"), py::arg("x"));
  m.def("semi_axes", &semi_axes, py::arg("mask"));
  m.def("mask_value", &mask_value, py::arg("mask"), py::arg("x"),
        py::arg("params") = MmosParams{});
  m.def(
      "density",
      [](const std::vector<Mask>& masks,
         const Eigen::Ref<const Eigen::MatrixXd>& centroids,
         const MmosParams& params) {
        return density(masks, matrix_to_vec3s(centroids), params);
      },
      py::arg("masks"), py::arg("centroids"),
      py::arg("params") = MmosParams{},
      "Element densities rho_i = prod_J h_J(x_i).");
  m.def(
      "density_jacobian_product",
      [](const std::vector<Mask>& masks,
         const Eigen::Ref<const Eigen::MatrixXd>& centroids,
         const MmosParams& params, const std::vector<double>& dI_drho) {
        return density_jacobian_product(masks, matrix_to_vec3s(centroids),
                                        params, dI_drho);
      },
      py::arg("masks"), py::arg("centroids"), py::arg("params"),
      py::arg("dI_drho"));

  py::class_<BoundaryConditions>(m, "BoundaryConditions")
      .def(py::init<>())
      .def_readwrite("fixed_dofs", &BoundaryConditions::fixed_dofs)
      .def_readwrite("loads", &BoundaryConditions::loads);

  py::class_<PcgResult>(m, "PcgResult")
      .def_readonly("iterations", &PcgResult::iterations)
      .def_readonly("rel_residual", &PcgResult::rel_residual)
      .def_readonly("converged", &PcgResult::converged);

  py::class_<FemSystem>(m, "FemSystem")
      .def(py::init<const Mesh&, const Element&>(), py::arg("mesh"),
           py::arg("element"), py::keep_alive<1, 2>(), py::keep_alive<1, 3>())
      .def_property_readonly("ndof", &FemSystem::ndof)
      .def("set_bc", &FemSystem::set_bc, py::arg("bc"))
      .def_property_readonly("load_vector", &FemSystem::load_vector)
      .def("apply_stiffness",
           [](const FemSystem& fem, const std::vector<double>& scale,
              const std::vector<double>& u) {
             std::vector<double> y;
             fem.apply_stiffness(scale, u, y);
             return y;
           },
           py::arg("scale"), py::arg("u"))
      .def("build_preconditioner", &FemSystem::build_preconditioner,
           py::arg("scale"))
      .def("pcg_solve",
           [](const FemSystem& fem, const std::vector<double>& scale,
              const std::vector<double>& f, double rel_tol,
              std::int64_t max_iter, std::vector<double> u0) {
             if (u0.empty())
               u0.assign(static_cast<std::size_t>(fem.ndof()), 0.0);
             const PcgResult res =
                 fem.pcg_solve(scale, f, PcgSettings{rel_tol, max_iter}, u0);
             return py::make_tuple(u0, res);
           },
           py::arg("scale"), py::arg("f"), py::arg("rel_tol") = 1e-6,
           py::arg("max_iter") = 100000,
           py::arg("u0") = std::vector<double>{})
      .def("compliance_and_gradient",
           [](const FemSystem& fem, const std::vector<double>& rho,
              const std::vector<double>& u, const std::vector<double>& f,
              double eta, double rho_min) {
             return fem.compliance_and_gradient(rho, Simp{eta, rho_min}, u, f);
           },
           py::arg("rho"), py::arg("u"), py::arg("f"), py::arg("eta") = 3.0,
           py::arg("rho_min") = 1e-4);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iteration", &TraceRecord::iteration)
      .def_readonly("objective", &TraceRecord::objective)
      .def_readonly("constraint", &TraceRecord::constraint)
      .def_readonly("max_dpsi", &TraceRecord::max_dpsi)
      .def_readonly("pcg_iters", &TraceRecord::pcg_iters)
      .def_readonly("seconds", &TraceRecord::seconds);

  m.def(
      "optimize_file",
      [](const std::string& config_path, const std::string& out_dir) {
        const Config cfg = parse_config(config_path);
        const Mesh mesh = build_mesh(cfg.grid);
        const Element element(cfg.grid.edge_len, cfg.material);
        OptProblem problem = make_problem(cfg, mesh, element);
        if (!out_dir.empty()) problem.output_dir = out_dir;
        const OptResult result = run(problem);
        Eigen::MatrixXd masks(static_cast<Eigen::Index>(result.masks.size()), 7);
        for (std::size_t j = 0; j < result.masks.size(); ++j)
          for (int k = 0; k < 7; ++k)
            masks(static_cast<Eigen::Index>(j), k) = result.masks[j].psi(k);
        py::dict out;
        out["masks"] = masks;
        out["rho"] = result.rho;
        out["objective"] = result.objective;
        out["constraint"] = result.constraint;
        out["status"] = result.trace.status;
        out["trace"] = result.trace.records;
        return out;
      },
      py::arg("config_path"), py::arg("out_dir") = std::string{},
      "Parse a problem file, run the optimization, return the final design.");
}
