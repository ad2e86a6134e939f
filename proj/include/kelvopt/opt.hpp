#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kelvopt/mmos.hpp"
#include "kelvopt/solve.hpp"

namespace kelvopt {

/// Volume constraint value and density gradient:
///   value = sum_i rho_i * v - vf * TE * v,   d(value)/drho_i = v,
/// with the per-element volume v identical for every element.
std::pair<double, std::vector<double>> volume_constraint(
    const std::vector<double>& rho, double element_volume, double vf);

/// Axis-aligned box.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
};

/// Uniform cell-centered grid of gx*gy*gz masks over the domain box, foci
/// at center +- foci_offset along x, size offset d0.
std::vector<Mask> init_mask_grid(const Box& domain,
                                 const std::array<int, 3>& counts,
                                 double foci_offset, double d0);

/// Method of Moving Asymptotes specialized to one inequality constraint,
/// with absolute per-variable move limits (the design variables here are
/// lengths on the physical domain scale, so range-relative limits would be
/// far too loose). Asymptotes are managed in move-limit units.
class MmaOptimizer {
 public:
  MmaOptimizer(std::vector<double> lower, std::vector<double> upper,
               std::vector<double> move);

  /// One update: current point, objective gradient, constraint value and
  /// constraint gradient (constraint form g <= 0). Returns the new point.
  std::vector<double> update(const std::vector<double>& x,
                             const std::vector<double>& df0, double f1,
                             const std::vector<double>& df1);

 private:
  std::size_t n_;
  std::vector<double> lower_, upper_, move_;
  std::vector<double> low_, upp_, xold1_, xold2_;
  int iter_ = 0;
};

struct TraceRecord {
  std::int64_t iteration = 0;  // 1-based
  double objective = 0.0;
  double constraint = 0.0;     // raw volume-constraint value
  double max_dpsi = 0.0;       // max |change| / bound range
  std::int64_t pcg_iters = 0;
  double seconds = 0.0;        // wall time of this iteration
};

struct OptTrace {
  std::vector<TraceRecord> records;  // exactly one per executed iteration
  std::string status;  // converged | stagnated | max_iter | infeasible
};

void write_trace_csv(const OptTrace& trace, const std::string& path);

enum class Algorithm { kMma, kPgd };

struct OptProblem {
  const Mesh* mesh = nullptr;
  const Element* element = nullptr;
  BoundaryConditions bc;
  std::vector<Mask> masks;
  MmosParams params;
  double vf = 0.15;
  std::vector<double> lower, upper;  // 7*TM bounds, mask-major
  std::int64_t max_outer_iter = 400;
  std::int64_t snapshot_interval = 0;      // 0 = no snapshots
  std::string output_dir;                  // used when snapshots enabled
  double move = 0.0;                       // 0 = auto: 2 * edge_len
  PcgSettings pcg{1e-6, 100000};
  double stagnation_tol = 1e-4;
  Algorithm algorithm = Algorithm::kMma;
  std::function<void(const TraceRecord&)> on_iteration;  // optional

  void validate() const;
};

struct OptResult {
  std::vector<Mask> masks;      // final design
  std::vector<double> rho;      // density of the final design
  std::vector<double> u;        // displacement of the final design
  double objective = 0.0;       // compliance of the final design
  double constraint = 0.0;      // raw volume-constraint value, final design
  OptTrace trace;
};

/// Outer optimization loop: density -> FE solve -> gradients -> design
/// update, until the iteration budget or design-change stagnation. Ends
/// with a feasibility restoration (a uniform, provably density-decreasing
/// increase of all mask sizes) if the final design overshoots the volume
/// budget, then one last FE evaluation of the returned design.
OptResult run(const OptProblem& problem);

}  // namespace kelvopt
