#pragma once

#include <array>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kelvopt/material.hpp"
#include "kelvopt/opt.hpp"

namespace kelvopt {

/// Raised for malformed or inconsistent problem files; CLI maps it (and
/// std::invalid_argument) to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node-coordinate box whose contained nodes get the listed components
/// fixed (default all three).
struct FixSpec {
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();
  double y_min = -std::numeric_limits<double>::infinity();
  double y_max = std::numeric_limits<double>::infinity();
  double z_min = -std::numeric_limits<double>::infinity();
  double z_max = std::numeric_limits<double>::infinity();
  std::string comps = "xyz";
};

/// Element-centroid box; every element inside it receives `force` at each
/// of the listed 1-based local nodes.
struct LoadSpec {
  double cx_min = -std::numeric_limits<double>::infinity();
  double cx_max = std::numeric_limits<double>::infinity();
  double cy_min = -std::numeric_limits<double>::infinity();
  double cy_max = std::numeric_limits<double>::infinity();
  double cz_min = -std::numeric_limits<double>::infinity();
  double cz_max = std::numeric_limits<double>::infinity();
  std::vector<int> nodes;  // 1-based local node ids
  Vec3 force = Vec3::Zero();
};

/// Parsed problem file (INI-style sections; [fix] and [load] repeatable).
struct Config {
  GridSpec grid;
  Material material;
  std::vector<FixSpec> fixes;
  std::vector<LoadSpec> loads;

  MmosParams params;
  double vf = 0.15;

  std::array<int, 3> mask_grid = {0, 0, 0};  // 0,0,0 = no grid init
  double foci_offset = 1.0;
  double d0 = 3.0;
  std::string mask_file;
  double margin = 20.0;  // focal-point box beyond the domain, per side
  double d_min = -3.0;
  double d_max = 20.0;

  PcgSettings solver{1e-6, 100000};

  std::int64_t max_outer_iter = 400;
  std::int64_t snapshot_interval = 0;
  std::string output_dir;
  double move = 0.0;  // 0 = auto
  std::string algorithm = "mma";
  double stagnation_tol = 1e-4;
};

Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& name);

/// Resolve the fix/load specs against a mesh.
BoundaryConditions make_bc(const Config& config, const Mesh& mesh);

/// Initial masks: from the explicit file when given, else the uniform grid
/// over the node bounding box.
std::vector<Mask> make_masks(const Config& config, const Mesh& mesh);

/// Design-variable bounds: focal coordinates within the node bounding box
/// expanded by `margin`, mask size within [d_min, d_max].
void make_bounds(const Config& config, const Mesh& mesh, std::size_t num_masks,
                 std::vector<double>& lower, std::vector<double>& upper);

/// Assemble the full optimization problem (mesh/element owned by caller).
OptProblem make_problem(const Config& config, const Mesh& mesh,
                        const Element& element);

}  // namespace kelvopt
