#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "kelvopt/config.hpp"
#include "kelvopt/opt.hpp"

using namespace kelvopt;
using kelvopt::testing::TempDir;

namespace {

const char* kTinyConfig = R"(
[grid]
nx = 5
ny = 2
nz = 2
edge_len = 0.25

[material]
lambda = 10
mu = 10

[fix]
x_max = 1e-9

[load]
cx_min = 2.7
cy_max = 0.26
nodes = 22 23
force = 0 -0.125 0

[masks]
grid = 2 2 2
foci_offset = 0.3
d0 = 1.0
margin = 1
d_min = -1
d_max = 5

[params]
vf = 0.15

[optimizer]
max_outer_iter = 3
stagnation_tol = 0
)";

struct TinyProblem {
  Config config;
  Mesh mesh;
  Element element;
  OptProblem problem;

  TinyProblem()
      : config(parse_config_text(kTinyConfig, "tiny.ini")),
        mesh(build_mesh(config.grid)),
        element(config.grid.edge_len, config.material),
        problem(make_problem(config, mesh, element)) {}
};

}  // namespace

TEST_SUITE("opt") {

TEST_CASE("volume constraint value and gradient") {
  const std::vector<double> rho = {1.0, 0.5, 0.25, 0.25};
  const double v = 2.0, vf = 0.25;
  const auto [value, grad] = volume_constraint(rho, v, vf);
  // material volume 2*2.0 = 4, budget 0.25*4*2 = 2.
  CHECK(value == doctest::Approx(2.0).epsilon(1e-14));
  REQUIRE(grad.size() == 4);
  for (double g : grad) CHECK(g == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(volume_constraint(rho, 0.0, vf), std::invalid_argument);
  CHECK_THROWS_AS(volume_constraint(rho, v, 1.0), std::invalid_argument);
}

TEST_CASE("mask grid initialization covers the box cell-centered") {
  Box domain;
  domain.lo = Vec3(0.0, 0.0, 0.0);
  domain.hi = Vec3(2.0, 3.0, 4.0);
  const auto masks = init_mask_grid(domain, {2, 3, 4}, 0.4, 1.5);
  REQUIRE(masks.size() == 24);
  for (const Mask& m : masks) {
    CHECK(m.d == 1.5);
    const Vec3 ctr = 0.5 * (m.f1 + m.f2);
    CHECK((m.f2 - m.f1).isApprox(Vec3(0.8, 0.0, 0.0), 1e-14));
    for (int c = 0; c < 3; ++c) {
      CHECK(ctr[c] > domain.lo[c]);
      CHECK(ctr[c] < domain.hi[c]);
    }
  }
  // Ordering is z-fastest; first centre sits half a cell in from the corner.
  const Vec3 c0 = 0.5 * (masks[0].f1 + masks[0].f2);
  const Vec3 c1 = 0.5 * (masks[1].f1 + masks[1].f2);
  const Vec3 c23 = 0.5 * (masks[23].f1 + masks[23].f2);
  CHECK(c0.isApprox(Vec3(0.5, 0.5, 0.5), 1e-14));
  CHECK(c1.isApprox(Vec3(0.5, 0.5, 1.5), 1e-14));
  CHECK(c23.isApprox(Vec3(1.5, 2.5, 3.5), 1e-14));
  CHECK_THROWS_AS(init_mask_grid(domain, {0, 1, 1}, 0.4, 1.5),
                  std::invalid_argument);
}

TEST_CASE("mma updates stay within bounds and move limits") {
  const std::size_t n = 5;
  std::vector<double> lo(n, -1.0), hi(n, 2.0), move(n, 0.3);
  MmaOptimizer mma(lo, hi, move);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dx(-1.0, 2.0), dg(-4.0, 4.0);
  std::vector<double> x(n);
  for (double& v : x) v = dx(rng);
  for (int it = 0; it < 20; ++it) {
    std::vector<double> df0(n), df1(n);
    for (std::size_t i = 0; i < n; ++i) {
      df0[i] = dg(rng);
      df1[i] = dg(rng);
    }
    const double f1 = dg(rng);
    const std::vector<double> xn = mma.update(x, df0, f1, df1);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(xn[i] >= lo[i] - 1e-14);
      CHECK(xn[i] <= hi[i] + 1e-14);
      CHECK(std::abs(xn[i] - x[i]) <= move[i] + 1e-12);
    }
    x = xn;
  }
}

TEST_CASE("mma minimizes a separable quadratic") {
  const std::size_t n = 4;
  const std::vector<double> target = {0.3, -0.7, 1.1, 0.0};
  std::vector<double> lo(n, -2.0), hi(n, 2.0), move(n, 0.2);
  MmaOptimizer mma(lo, hi, move);
  std::vector<double> x(n, 1.9);
  for (int it = 0; it < 80; ++it) {
    std::vector<double> df0(n);
    for (std::size_t i = 0; i < n; ++i) df0[i] = 2.0 * (x[i] - target[i]);
    x = mma.update(x, df0, -1.0, std::vector<double>(n, 0.0));
  }
  for (std::size_t i = 0; i < n; ++i)
    CHECK(x[i] == doctest::Approx(target[i]).scale(1.0).epsilon(1e-3));
}

TEST_CASE("mma honors an active linear constraint") {
  // minimize -(x0 + x1) subject to x0 + x1 - 1 <= 0 on [0, 1]^2:
  // the optimum is on the constraint line.
  const std::size_t n = 2;
  MmaOptimizer mma(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0),
                   std::vector<double>(n, 0.1));
  std::vector<double> x(n, 0.1);
  for (int it = 0; it < 60; ++it) {
    const double g = x[0] + x[1] - 1.0;
    x = mma.update(x, std::vector<double>(n, -1.0), g,
                   std::vector<double>(n, 1.0));
  }
  CHECK(x[0] + x[1] == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("trace has exactly one record per executed iteration") {
  TinyProblem tiny;
  std::vector<TraceRecord> seen;
  tiny.problem.on_iteration = [&](const TraceRecord& r) { seen.push_back(r); };
  const OptResult result = run(tiny.problem);
  REQUIRE(result.trace.records.size() == 3);
  REQUIRE(seen.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const TraceRecord& r = result.trace.records[i];
    CHECK(r.iteration == static_cast<std::int64_t>(i + 1));
    CHECK(r.objective > 0.0);
    CHECK(r.pcg_iters > 0);
    CHECK(r.seconds >= 0.0);
    CHECK(r.max_dpsi > 0.0);
    CHECK(seen[i].iteration == r.iteration);
    CHECK(seen[i].objective == r.objective);
  }
  CHECK(result.trace.status == "max_iter");
  CHECK(result.rho.size() == static_cast<std::size_t>(tiny.mesh.num_elements()));
  CHECK(result.u.size() == static_cast<std::size_t>(3 * tiny.mesh.num_nodes()));
  CHECK(result.objective > 0.0);
}

TEST_CASE("zero iterations leave the design untouched") {
  TinyProblem tiny;
  tiny.problem.max_outer_iter = 0;
  const OptResult result = run(tiny.problem);
  CHECK(result.trace.records.empty());
  REQUIRE(result.masks.size() == tiny.problem.masks.size());
  for (std::size_t j = 0; j < result.masks.size(); ++j)
    for (int k = 0; k < 7; ++k)
      CHECK(result.masks[j].psi(k) == tiny.problem.masks[j].psi(k));
  CHECK(result.objective == 0.0);
  for (double ui : result.u) CHECK(ui == 0.0);
}

TEST_CASE("stagnation stops the loop early") {
  TinyProblem tiny;
  tiny.problem.max_outer_iter = 50;
  tiny.problem.stagnation_tol = 10.0;  // any step counts as stagnant
  const OptResult result = run(tiny.problem);
  CHECK(result.trace.status == "stagnated");
  CHECK(result.trace.records.size() == 1);
}

TEST_CASE("snapshots are written at the configured interval") {
  TinyProblem tiny;
  TempDir dir;
  tiny.problem.max_outer_iter = 4;
  tiny.problem.snapshot_interval = 2;
  tiny.problem.output_dir = dir.path.string();
  run(tiny.problem);
  namespace fs = std::filesystem;
  CHECK(fs::exists(dir.path / "masks_000002.txt"));
  CHECK(fs::exists(dir.path / "masks_000004.txt"));
  CHECK(!fs::exists(dir.path / "masks_000001.txt"));
  CHECK(!fs::exists(dir.path / "masks_000003.txt"));
  const auto snap = read_masks((dir.path / "masks_000002.txt").string());
  CHECK(snap.size() == tiny.problem.masks.size());
}

TEST_CASE("final feasibility restoration repairs a volume overshoot") {
  TinyProblem tiny;
  // Start nearly solid: tiny masks remove almost nothing.
  for (Mask& m : tiny.problem.masks) m.d = 0.05;
  tiny.problem.max_outer_iter = 1;
  const OptResult result = run(tiny.problem);
  CHECK(result.trace.records.size() == 1);   // restoration adds no records
  CHECK(result.trace.records[0].constraint > 0.0);  // infeasible while running
  CHECK(result.trace.status == "max_iter");
  CHECK(result.constraint <= 0.0);           // repaired final design
  CHECK(result.constraint >= -1e-6);         // ... just at the budget
}

TEST_CASE("an impossible volume budget is reported as infeasible") {
  TinyProblem tiny;
  // One small mask whose size may not grow: 15% volume is unreachable.
  tiny.problem.masks = {tiny.problem.masks[0]};
  tiny.problem.masks[0].d = 0.05;
  tiny.problem.lower.resize(7);
  tiny.problem.upper.resize(7);
  tiny.problem.upper[6] = 0.2;
  tiny.problem.max_outer_iter = 1;
  const OptResult result = run(tiny.problem);
  CHECK(result.trace.status == "infeasible");
  CHECK(result.constraint > 0.0);
}

TEST_CASE("validation rejects inconsistent problems") {
  TinyProblem tiny;
  OptProblem p = tiny.problem;
  p.mesh = nullptr;
  CHECK_THROWS_AS(run(p), std::invalid_argument);

  p = tiny.problem;
  p.vf = 1.0;
  CHECK_THROWS_AS(run(p), std::invalid_argument);

  p = tiny.problem;
  p.lower.pop_back();
  CHECK_THROWS_AS(run(p), std::invalid_argument);

  p = tiny.problem;
  p.masks[0].d = 100.0;  // outside its bound
  CHECK_THROWS_AS(run(p), std::invalid_argument);

  p = tiny.problem;
  p.masks.clear();
  CHECK_THROWS_AS(run(p), std::invalid_argument);
}

TEST_CASE("repeated runs are bit-identical") {
  TinyProblem tiny;
  const OptResult a = run(tiny.problem);
  const OptResult b = run(tiny.problem);
  REQUIRE(a.masks.size() == b.masks.size());
  for (std::size_t j = 0; j < a.masks.size(); ++j)
    for (int k = 0; k < 7; ++k) CHECK(a.masks[j].psi(k) == b.masks[j].psi(k));
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    CHECK(a.trace.records[i].objective == b.trace.records[i].objective);
    CHECK(a.trace.records[i].constraint == b.trace.records[i].constraint);
    CHECK(a.trace.records[i].pcg_iters == b.trace.records[i].pcg_iters);
  }
}

TEST_CASE("optimization is equivariant under a z-mirror of the problem") {
  // Reflecting the whole problem in z (an even-nz lattice maps onto itself)
  // must reflect the optimized design. Runs the same few iterations on the
  // original and the mirrored setup and compares mask parameters.
  const GridSpec spec{4, 2, 4, 0.25};
  const Mesh mesh = build_mesh(spec);
  const Element element(spec.edge_len, Material::from_lame(10.0, 10.0));

  Vec3 lo = mesh.nodes.front(), hi = mesh.nodes.front();
  for (const Vec3& p : mesh.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double zsum = lo.z() + hi.z();  // mirror: z -> zsum - z

  // Clamp the x=0 face; load -y on every node of the far x face.
  BoundaryConditions bc;
  std::vector<std::int64_t> far;
  for (std::int64_t n = 0; n < mesh.num_nodes(); ++n) {
    const Vec3& p = mesh.nodes[static_cast<std::size_t>(n)];
    if (p.x() <= lo.x() + 1e-9)
      for (int c = 0; c < 3; ++c) bc.fixed_dofs.push_back(3 * n + c);
    if (p.x() >= hi.x() - 1e-9) far.push_back(n);
  }
  REQUIRE(!far.empty());
  for (std::int64_t n : far) bc.loads.push_back({3 * n + 1, -0.05});

  // The mirrored node of each loaded/fixed node exists by lattice symmetry;
  // the load pattern (whole faces, y-forces) is mirror-invariant, so the
  // mirrored problem only differs in the initial masks and bounds (which we
  // both keep symmetric) -- hence it is the *same* problem, and equivariance
  // means: the result must be mirror-symmetric.
  Box box;
  box.lo = lo;
  box.hi = hi;
  const std::array<int, 3> counts = {2, 2, 2};
  OptProblem problem;
  problem.mesh = &mesh;
  problem.element = &element;
  problem.bc = bc;
  problem.masks = init_mask_grid(box, counts, 0.3, 1.2);
  const std::size_t nvar = 7 * problem.masks.size();
  problem.lower.assign(nvar, 0.0);
  problem.upper.assign(nvar, 0.0);
  for (std::size_t j = 0; j < problem.masks.size(); ++j) {
    for (int k = 0; k < 6; ++k) {
      const int axis = k % 3;
      problem.lower[7 * j + k] = lo[axis] - 1.0;
      problem.upper[7 * j + k] = hi[axis] + 1.0;
    }
    problem.lower[7 * j + 6] = -1.0;
    problem.upper[7 * j + 6] = 5.0;
  }
  problem.vf = 0.3;
  problem.max_outer_iter = 3;
  problem.stagnation_tol = 0.0;
  problem.pcg = PcgSettings{1e-12, 200000};

  const OptResult result = run(problem);

  // Mask (a,b,c) pairs with (a,b,gz-1-c); z-fastest ordering.
  const int gz = counts[2];
  for (int a = 0; a < counts[0]; ++a) {
    for (int b = 0; b < counts[1]; ++b) {
      for (int c = 0; c < gz; ++c) {
        const std::size_t j = static_cast<std::size_t>((a * counts[1] + b) * gz + c);
        const std::size_t jm =
            static_cast<std::size_t>((a * counts[1] + b) * gz + (gz - 1 - c));
        const Mask& m = result.masks[j];
        const Mask& p = result.masks[jm];
        CHECK(m.f1.x() == doctest::Approx(p.f1.x()).scale(1.0).epsilon(1e-6));
        CHECK(m.f1.y() == doctest::Approx(p.f1.y()).scale(1.0).epsilon(1e-6));
        CHECK(m.f1.z() == doctest::Approx(zsum - p.f1.z()).scale(1.0).epsilon(1e-6));
        CHECK(m.f2.x() == doctest::Approx(p.f2.x()).scale(1.0).epsilon(1e-6));
        CHECK(m.f2.y() == doctest::Approx(p.f2.y()).scale(1.0).epsilon(1e-6));
        CHECK(m.f2.z() == doctest::Approx(zsum - p.f2.z()).scale(1.0).epsilon(1e-6));
        CHECK(m.d == doctest::Approx(p.d).scale(1.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("projected-gradient fallback also descends and stays feasible") {
  TinyProblem tiny;
  tiny.problem.algorithm = Algorithm::kPgd;
  tiny.problem.max_outer_iter = 5;
  const OptResult result = run(tiny.problem);
  CHECK(result.trace.records.size() == 5);
  CHECK(result.constraint <= 1e-9);
}

}  // TEST_SUITE
