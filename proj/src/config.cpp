#include "kelvopt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kelvopt {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& name, int line,
                       const std::string& what) {
  throw ConfigError(name + ":" + std::to_string(line) + ": " + what);
}

double to_double(const std::string& name, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(name, line, "expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& name, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(name, line, "expected an integer, got '" + v + "'");
  }
}

// Lists may be separated by whitespace, commas, or both.
std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  for (char c : v) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item.push_back(c);
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& name) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  double youngs = 0.0, poisson = -2.0;  // optional alternative to lambda/mu

  while (std::getline(is, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(name, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "fix") {
        cfg.fixes.emplace_back();
      } else if (section == "load") {
        cfg.loads.emplace_back();
      } else if (section != "grid" && section != "material" &&
                 section != "params" && section != "masks" &&
                 section != "solver" && section != "optimizer") {
        fail(name, lineno, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(name, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(name, lineno, "empty key");
    if (section.empty()) fail(name, lineno, "key outside any section");

    auto num = [&] { return to_double(name, lineno, val); };
    auto integer = [&] { return to_int(name, lineno, val); };

    if (section == "grid") {
      if (key == "nx") cfg.grid.nx = static_cast<int>(integer());
      else if (key == "ny") cfg.grid.ny = static_cast<int>(integer());
      else if (key == "nz") cfg.grid.nz = static_cast<int>(integer());
      else if (key == "edge_len") cfg.grid.edge_len = num();
      else fail(name, lineno, "unknown key '" + key + "' in [grid]");
    } else if (section == "material") {
      if (key == "lambda") cfg.material.lambda = num();
      else if (key == "mu") cfg.material.mu = num();
      else if (key == "youngs") youngs = num();
      else if (key == "poisson") poisson = num();
      else fail(name, lineno, "unknown key '" + key + "' in [material]");
    } else if (section == "fix") {
      FixSpec& f = cfg.fixes.back();
      if (key == "x_min") f.x_min = num();
      else if (key == "x_max") f.x_max = num();
      else if (key == "y_min") f.y_min = num();
      else if (key == "y_max") f.y_max = num();
      else if (key == "z_min") f.z_min = num();
      else if (key == "z_max") f.z_max = num();
      else if (key == "comps") {
        f.comps = val;
        for (char c : val) {
          if (c != 'x' && c != 'y' && c != 'z')
            fail(name, lineno, "comps must be a subset of 'xyz'");
        }
        if (val.empty()) fail(name, lineno, "comps must not be empty");
      } else {
        fail(name, lineno, "unknown key '" + key + "' in [fix]");
      }
    } else if (section == "load") {
      LoadSpec& ld = cfg.loads.back();
      if (key == "cx_min") ld.cx_min = num();
      else if (key == "cx_max") ld.cx_max = num();
      else if (key == "cy_min") ld.cy_min = num();
      else if (key == "cy_max") ld.cy_max = num();
      else if (key == "cz_min") ld.cz_min = num();
      else if (key == "cz_max") ld.cz_max = num();
      else if (key == "nodes") {
        for (const std::string& item : split_list(val)) {
          const std::int64_t n = to_int(name, lineno, item);
          if (n < 1 || n > 24)
            fail(name, lineno, "local node ids must be in 1..24");
          ld.nodes.push_back(static_cast<int>(n));
        }
      } else if (key == "force") {
        const auto parts = split_list(val);
        if (parts.size() != 3)
          fail(name, lineno, "force needs 3 components");
        for (int c = 0; c < 3; ++c)
          ld.force[c] = to_double(name, lineno, parts[static_cast<std::size_t>(c)]);
      } else {
        fail(name, lineno, "unknown key '" + key + "' in [load]");
      }
    } else if (section == "params") {
      if (key == "alpha") cfg.params.alpha = num();
      else if (key == "eta") cfg.params.eta = num();
      else if (key == "rho_min") cfg.params.rho_min = num();
      else if (key == "epsilon") cfg.params.epsilon = num();
      else if (key == "vf") cfg.vf = num();
      else fail(name, lineno, "unknown key '" + key + "' in [params]");
    } else if (section == "masks") {
      if (key == "grid") {
        const auto parts = split_list(val);
        if (parts.size() != 3)
          fail(name, lineno, "masks grid needs 3 counts");
        for (int c = 0; c < 3; ++c) {
          cfg.mask_grid[static_cast<std::size_t>(c)] =
              static_cast<int>(to_int(name, lineno, parts[static_cast<std::size_t>(c)]));
        }
      } else if (key == "foci_offset") cfg.foci_offset = num();
      else if (key == "d0") cfg.d0 = num();
      else if (key == "file") cfg.mask_file = val;
      else if (key == "margin") cfg.margin = num();
      else if (key == "d_min") cfg.d_min = num();
      else if (key == "d_max") cfg.d_max = num();
      else fail(name, lineno, "unknown key '" + key + "' in [masks]");
    } else if (section == "solver") {
      if (key == "rel_tol") cfg.solver.rel_tol = num();
      else if (key == "max_iter") cfg.solver.max_iter = integer();
      else fail(name, lineno, "unknown key '" + key + "' in [solver]");
    } else if (section == "optimizer") {
      if (key == "max_outer_iter") cfg.max_outer_iter = integer();
      else if (key == "snapshot_interval") cfg.snapshot_interval = integer();
      else if (key == "output_dir") cfg.output_dir = val;
      else if (key == "move") cfg.move = num();
      else if (key == "algorithm") {
        if (val != "mma" && val != "pgd")
          fail(name, lineno, "algorithm must be 'mma' or 'pgd'");
        cfg.algorithm = val;
      } else if (key == "stagnation_tol") cfg.stagnation_tol = num();
      else fail(name, lineno, "unknown key '" + key + "' in [optimizer]");
    }
  }

  try {
    if (youngs > 0.0 || poisson > -2.0)
      cfg.material = Material::from_youngs(youngs, poisson);
    cfg.grid.validate();
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": " + e.what());
  }
  if (!(cfg.vf > 0.0) || cfg.vf >= 1.0)
    throw ConfigError(name + ": vf must be in (0,1)");
  return cfg;
}

Config parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path);
}

BoundaryConditions make_bc(const Config& config, const Mesh& mesh) {
  BoundaryConditions bc;
  std::vector<std::uint8_t> fixed(static_cast<std::size_t>(3 * mesh.num_nodes()), 0);
  for (const FixSpec& f : config.fixes) {
    for (std::int64_t n = 0; n < mesh.num_nodes(); ++n) {
      const Vec3& x = mesh.nodes[static_cast<std::size_t>(n)];
      if (x.x() < f.x_min || x.x() > f.x_max || x.y() < f.y_min ||
          x.y() > f.y_max || x.z() < f.z_min || x.z() > f.z_max) {
        continue;
      }
      for (char c : f.comps) {
        const int comp = c == 'x' ? 0 : (c == 'y' ? 1 : 2);
        fixed[static_cast<std::size_t>(3 * n + comp)] = 1;
      }
    }
  }
  for (std::size_t d = 0; d < fixed.size(); ++d) {
    if (fixed[d]) bc.fixed_dofs.push_back(static_cast<std::int64_t>(d));
  }
  for (const LoadSpec& ld : config.loads) {
    if (ld.nodes.empty())
      throw ConfigError("[load] block needs a 'nodes' list");
    for (std::int64_t e = 0; e < mesh.num_elements(); ++e) {
      const Vec3& c = mesh.centroids[static_cast<std::size_t>(e)];
      if (c.x() < ld.cx_min || c.x() > ld.cx_max || c.y() < ld.cy_min ||
          c.y() > ld.cy_max || c.z() < ld.cz_min || c.z() > ld.cz_max) {
        continue;
      }
      for (int ln : ld.nodes) {
        const std::int64_t g =
            mesh.conn[static_cast<std::size_t>(e)][static_cast<std::size_t>(ln - 1)];
        for (int comp = 0; comp < 3; ++comp) {
          if (ld.force[comp] != 0.0)
            bc.loads.emplace_back(3 * g + comp, ld.force[comp]);
        }
      }
    }
  }
  return bc;
}

namespace {

Box node_box(const Mesh& mesh) {
  Box box{mesh.nodes.front(), mesh.nodes.front()};
  for (const Vec3& x : mesh.nodes) {
    box.lo = box.lo.cwiseMin(x);
    box.hi = box.hi.cwiseMax(x);
  }
  return box;
}

}  // namespace

std::vector<Mask> make_masks(const Config& config, const Mesh& mesh) {
  if (!config.mask_file.empty()) return read_masks(config.mask_file);
  if (config.mask_grid[0] < 1 || config.mask_grid[1] < 1 ||
      config.mask_grid[2] < 1) {
    throw ConfigError("need [masks] grid = gx,gy,gz or file = PATH");
  }
  return init_mask_grid(node_box(mesh), config.mask_grid, config.foci_offset,
                        config.d0);
}

void make_bounds(const Config& config, const Mesh& mesh, std::size_t num_masks,
                 std::vector<double>& lower, std::vector<double>& upper) {
  const Box box = node_box(mesh);
  lower.resize(7 * num_masks);
  upper.resize(7 * num_masks);
  for (std::size_t j = 0; j < num_masks; ++j) {
    for (int k = 0; k < 6; ++k) {
      lower[7 * j + static_cast<std::size_t>(k)] = box.lo[k % 3] - config.margin;
      upper[7 * j + static_cast<std::size_t>(k)] = box.hi[k % 3] + config.margin;
    }
    lower[7 * j + 6] = config.d_min;
    upper[7 * j + 6] = config.d_max;
  }
}

OptProblem make_problem(const Config& config, const Mesh& mesh,
                        const Element& element) {
  OptProblem problem;
  problem.mesh = &mesh;
  problem.element = &element;
  problem.bc = make_bc(config, mesh);
  problem.masks = make_masks(config, mesh);
  problem.params = config.params;
  problem.vf = config.vf;
  make_bounds(config, mesh, problem.masks.size(), problem.lower,
              problem.upper);
  problem.max_outer_iter = config.max_outer_iter;
  problem.snapshot_interval = config.snapshot_interval;
  problem.output_dir = config.output_dir;
  problem.move = config.move;
  problem.pcg = config.solver;
  problem.stagnation_tol = config.stagnation_tol;
  problem.algorithm =
      config.algorithm == "pgd" ? Algorithm::kPgd : Algorithm::kMma;
  return problem;
}

}  // namespace kelvopt
