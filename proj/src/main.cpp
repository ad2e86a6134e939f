#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kelvopt/config.hpp"
#include "kelvopt/gradcheck.hpp"
#include "kelvopt/mesh_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace kelvopt;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  unsigned seed = 12345;
};

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

std::string out_path(const CommonOpts& opts, const std::string& file) {
  fs::create_directories(opts.out_dir);
  return (fs::path(opts.out_dir) / file).string();
}

int cmd_mesh(const CommonOpts& opts) {
  const Config cfg = parse_config(opts.config_path);
  const Mesh mesh = build_mesh(cfg.grid);
  write_mesh_binary(mesh, out_path(opts, "mesh.bin"));
  write_mesh_vtk(mesh, out_path(opts, "mesh.vtk"));
  std::printf("TE=%" PRId64 " TN=%" PRId64 " TP=%" PRId64 "\n",
              mesh.num_elements(), mesh.num_nodes(), mesh.num_points());
  return 0;
}

int cmd_solve(const CommonOpts& opts, const std::string& mask_override) {
  Config cfg = parse_config(opts.config_path);
  if (!mask_override.empty()) cfg.mask_file = mask_override;
  const Mesh mesh = build_mesh(cfg.grid);
  const Element element(cfg.grid.edge_len, cfg.material);
  FemSystem fem(mesh, element);
  fem.set_bc(make_bc(cfg, mesh));

  std::vector<double> rho(static_cast<std::size_t>(mesh.num_elements()), 1.0);
  if (!cfg.mask_file.empty() ||
      (cfg.mask_grid[0] >= 1 && cfg.mask_grid[1] >= 1 && cfg.mask_grid[2] >= 1)) {
    rho = density(make_masks(cfg, mesh), mesh.centroids, cfg.params);
  }
  const Simp simp{cfg.params.eta, cfg.params.rho_min};
  std::vector<double> scale(rho.size());
  for (std::size_t e = 0; e < rho.size(); ++e) scale[e] = simp.scale(rho[e]);

  std::vector<double> u(static_cast<std::size_t>(fem.ndof()), 0.0);
  const PcgResult res =
      fem.pcg_solve(scale, fem.load_vector(), cfg.solver, u);
  if (!res.converged) {
    std::fprintf(stderr, "warning: PCG hit the iteration cap (residual %g)\n",
                 res.rel_residual);
  }
  const double compliance =
      fem.compliance_and_gradient(rho, simp, u, fem.load_vector()).first;
  write_point_field_vtk(mesh, out_path(opts, "solution.vtk"), "displacement",
                        u, rho);
  std::printf("compliance=%.12g pcg_iters=%" PRId64 " rel_residual=%.3g\n",
              compliance, res.iterations, res.rel_residual);
  return 0;
}

int cmd_optimize(const CommonOpts& opts) {
  Config cfg = parse_config(opts.config_path);
  if (cfg.output_dir.empty()) cfg.output_dir = opts.out_dir;
  const Mesh mesh = build_mesh(cfg.grid);
  const Element element(cfg.grid.edge_len, cfg.material);
  OptProblem problem = make_problem(cfg, mesh, element);
  problem.output_dir = cfg.output_dir;
  problem.on_iteration = [](const TraceRecord& r) {
    std::printf("iter %4" PRId64 "  obj %.6e  constraint %+.6e  dpsi %.4f  "
                "pcg %" PRId64 "  %.2fs\n",
                r.iteration, r.objective, r.constraint, r.max_dpsi,
                r.pcg_iters, r.seconds);
    std::fflush(stdout);
  };

  const OptResult result = run(problem);
  write_trace_csv(result.trace, out_path(opts, "trace.csv"));
  write_masks(result.masks, out_path(opts, "masks_final.txt"));
  write_mesh_vtk(mesh, out_path(opts, "density.vtk"), result.rho);
  write_mesh_vtk(mesh, out_path(opts, "density_solid.vtk"), result.rho, 0.2);
  std::printf("status=%s iterations=%zu objective=%.12g constraint=%.6g\n",
              result.trace.status.c_str(), result.trace.records.size(),
              result.objective, result.constraint);
  return result.trace.status == "infeasible" ? 3 : 0;
}

int cmd_check_gradients(const CommonOpts& opts) {
  std::mt19937 rng(opts.seed);
  bool ok = true;
  auto report = [&](const char* name, double err, double tol) {
    const bool pass = err < tol;
    ok = ok && pass;
    std::printf("%-28s max rel error %.3e (tol %.0e) %s\n", name, err, tol,
                pass ? "ok" : "FAIL");
    std::fflush(stdout);
  };
  report("shape gradients", check_shape_gradients(rng), 1e-5);
  report("mmos jacobian product", check_mmos_gradients(rng, 20), 1e-5);
  report("compliance drho", check_compliance_gradient(rng), 1e-4);
  report("composed mask gradient", check_composed_gradient(rng), 1e-3);
  if (!ok) {
    std::fprintf(stderr, "error[numeric]: gradient check failed\n");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology optimization on truncated-octahedron lattices"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts opts;
  app.add_option("--config", opts.config_path, "problem file (INI)");
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--threads", opts.threads, "worker threads (0 = default)");
  app.add_option("--seed", opts.seed, "seed for randomized checks");

  auto* mesh_cmd =
      app.add_subcommand("mesh", "generate the lattice and export it");
  auto* solve_cmd =
      app.add_subcommand("solve", "single FE solve at a fixed density field");
  std::string mask_override;
  solve_cmd->add_option("--masks", mask_override,
                        "mask file overriding the config");
  auto* opt_cmd =
      app.add_subcommand("optimize", "run the topology optimization loop");
  auto* check_cmd = app.add_subcommand(
      "check-gradients", "finite-difference validation of all gradients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error[config]: %s\n", e.what());
    return 2;
  }

  apply_threads(opts.threads);
  const bool needs_config = !check_cmd->parsed();
  if (needs_config && opts.config_path.empty()) {
    std::fprintf(stderr, "error[config]: --config is required\n");
    return 2;
  }

  try {
    if (mesh_cmd->parsed()) return cmd_mesh(opts);
    if (solve_cmd->parsed()) return cmd_solve(opts, mask_override);
    if (opt_cmd->parsed()) return cmd_optimize(opts);
    if (check_cmd->parsed()) return cmd_check_gradients(opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error[config]: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error[config]: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[numeric]: %s\n", e.what());
    return 3;
  }
  return 0;
}
