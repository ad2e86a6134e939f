#include "kelvopt/opt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace kelvopt {

std::pair<double, std::vector<double>> volume_constraint(
    const std::vector<double>& rho, double element_volume, double vf) {
  if (!(element_volume > 0.0) || !(vf > 0.0) || vf >= 1.0)
    throw std::invalid_argument("volume_constraint: bad parameters");
  double sum = 0.0;
  for (double r : rho) sum += r;
  const double value =
      element_volume * (sum - vf * static_cast<double>(rho.size()));
  return {value, std::vector<double>(rho.size(), element_volume)};
}

std::vector<Mask> init_mask_grid(const Box& domain,
                                 const std::array<int, 3>& counts,
                                 double foci_offset, double d0) {
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("init_mask_grid: counts must be >= 1");
  }
  std::vector<Mask> masks;
  masks.reserve(static_cast<std::size_t>(counts[0]) * counts[1] * counts[2]);
  const Vec3 span = domain.hi - domain.lo;
  for (int a = 0; a < counts[0]; ++a) {
    for (int b = 0; b < counts[1]; ++b) {
      for (int c = 0; c < counts[2]; ++c) {
        const Vec3 frac((a + 0.5) / counts[0], (b + 0.5) / counts[1],
                        (c + 0.5) / counts[2]);
        const Vec3 ctr = domain.lo + frac.cwiseProduct(span);
        Mask m;
        m.f1 = ctr - Vec3(foci_offset, 0.0, 0.0);
        m.f2 = ctr + Vec3(foci_offset, 0.0, 0.0);
        m.d = d0;
        masks.push_back(m);
      }
    }
  }
  return masks;
}

// ----------------------------------------------------------------- MMA

MmaOptimizer::MmaOptimizer(std::vector<double> lower,
                           std::vector<double> upper,
                           std::vector<double> move)
    : n_(lower.size()),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      move_(std::move(move)) {
  if (upper_.size() != n_ || move_.size() != n_)
    throw std::invalid_argument("mma: bound/move size mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) ||
        !std::isfinite(upper_[i]))
      throw std::invalid_argument("mma: bounds must be finite with min < max");
    if (!(move_[i] > 0.0))
      throw std::invalid_argument("mma: move limits must be positive");
  }
}

std::vector<double> MmaOptimizer::update(const std::vector<double>& x,
                                         const std::vector<double>& df0,
                                         double f1,
                                         const std::vector<double>& df1) {
  if (x.size() != n_ || df0.size() != n_ || df1.size() != n_)
    throw std::invalid_argument("mma: input size mismatch");
  constexpr double kAsyInit = 4.0, kAsyIncr = 1.2, kAsyDecr = 0.7;

  std::vector<double> low(n_), upp(n_), alpha(n_), beta(n_);
  std::vector<double> p0(n_), q0(n_), p1(n_), q1(n_);
  ++iter_;
  for (std::size_t i = 0; i < n_; ++i) {
    if (iter_ <= 2) {
      low[i] = x[i] - kAsyInit * move_[i];
      upp[i] = x[i] + kAsyInit * move_[i];
    } else {
      const double sign = (x[i] - xold1_[i]) * (xold1_[i] - xold2_[i]);
      const double fac = sign > 0.0 ? kAsyIncr : (sign < 0.0 ? kAsyDecr : 1.0);
      low[i] = x[i] - fac * (xold1_[i] - low_[i]);
      upp[i] = x[i] + fac * (upp_[i] - xold1_[i]);
      low[i] = std::clamp(low[i], x[i] - 40.0 * move_[i],
                          x[i] - 0.2 * move_[i]);
      upp[i] = std::clamp(upp[i], x[i] + 0.2 * move_[i],
                          x[i] + 40.0 * move_[i]);
    }
    alpha[i] = std::max({lower_[i], low[i] + 0.1 * (x[i] - low[i]),
                         x[i] - move_[i]});
    beta[i] = std::min({upper_[i], upp[i] - 0.1 * (upp[i] - x[i]),
                        x[i] + move_[i]});

    const double rng = std::max(upper_[i] - lower_[i], 1e-12);
    const double du = upp[i] - x[i], dl = x[i] - low[i];
    auto pq = [&](double df, double& p, double& q) {
      const double dfp = std::max(df, 0.0), dfm = std::max(-df, 0.0);
      p = du * du * (1.001 * dfp + 0.001 * dfm + 1e-5 / rng);
      q = dl * dl * (0.001 * dfp + 1.001 * dfm + 1e-5 / rng);
    };
    pq(df0[i], p0[i], q0[i]);
    pq(df1[i], p1[i], q1[i]);
  }

  double r1 = f1;
  for (std::size_t i = 0; i < n_; ++i)
    r1 -= p1[i] / (upp[i] - x[i]) + q1[i] / (x[i] - low[i]);

  auto x_of_lam = [&](double lam, std::vector<double>& y) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double sp = std::sqrt(p0[i] + lam * p1[i]);
      const double sq = std::sqrt(q0[i] + lam * q1[i]);
      y[i] = std::clamp((low[i] * sp + upp[i] * sq) / (sp + sq), alpha[i],
                        beta[i]);
    }
  };
  std::vector<double> y(n_);
  auto g1 = [&](double lam) {
    x_of_lam(lam, y);
    double g = r1;
    for (std::size_t i = 0; i < n_; ++i)
      g += p1[i] / (upp[i] - y[i]) + q1[i] / (y[i] - low[i]);
    return g;
  };

  double lam = 0.0;
  if (g1(0.0) > 0.0) {  // constraint active: bisect the dual
    double lo = 0.0, hi = 1.0;
    while (g1(hi) > 0.0 && hi < 1e12) hi *= 10.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g1(mid) > 0.0 ? lo : hi) = mid;
    }
    lam = 0.5 * (lo + hi);
  }
  std::vector<double> xnew(n_);
  x_of_lam(lam, xnew);

  xold2_ = std::move(xold1_);
  xold1_ = x;  // history of visited points drives the oscillation test
  low_ = std::move(low);
  upp_ = std::move(upp);
  return xnew;
}

// ----------------------------------------------------------------- trace

void write_trace_csv(const OptTrace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "iteration,objective,constraint,max_dpsi,pcg_iters,seconds\n";
  char buf[256];
  for (const TraceRecord& r : trace.records) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%lld,%.6g\n",
                  static_cast<long long>(r.iteration), r.objective,
                  r.constraint, r.max_dpsi, static_cast<long long>(r.pcg_iters),
                  r.seconds);
    os << buf;
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

// ------------------------------------------------------------------ run

void OptProblem::validate() const {
  if (!mesh || !element) throw std::invalid_argument("opt: mesh/element not set");
  if (!(vf > 0.0) || vf >= 1.0)
    throw std::invalid_argument("opt: vf must be in (0,1)");
  if (masks.empty()) throw std::invalid_argument("opt: need at least one mask");
  params.validate();
  const std::size_t n = 7 * masks.size();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("opt: bounds must have 7 entries per mask");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) ||
        !(lower[i] < upper[i]))
      throw std::invalid_argument("opt: bounds must be finite with min < max");
    const double psi = masks[i / 7].psi(static_cast<int>(i % 7));
    if (psi < lower[i] || psi > upper[i])
      throw std::invalid_argument("opt: initial mask outside bounds");
  }
  if (max_outer_iter < 0) throw std::invalid_argument("opt: bad max_outer_iter");
  if (move < 0.0) throw std::invalid_argument("opt: move must be >= 0");
}

namespace {

std::vector<double> flatten(const std::vector<Mask>& masks) {
  std::vector<double> x(7 * masks.size());
  for (std::size_t j = 0; j < masks.size(); ++j)
    for (int k = 0; k < 7; ++k) x[7 * j + k] = masks[j].psi(k);
  return x;
}

std::vector<Mask> unflatten(const std::vector<double>& x) {
  std::vector<Mask> masks(x.size() / 7);
  for (std::size_t j = 0; j < masks.size(); ++j)
    for (int k = 0; k < 7; ++k) masks[j].set_psi(k, x[7 * j + k]);
  return masks;
}

void write_snapshot(const OptProblem& problem, std::int64_t iter,
                    const std::vector<Mask>& masks) {
  namespace fs = std::filesystem;
  fs::create_directories(problem.output_dir);
  char name[64];
  std::snprintf(name, sizeof(name), "masks_%06lld.txt",
                static_cast<long long>(iter));
  write_masks(masks, (fs::path(problem.output_dir) / name).string());
}

// Uniform growth of every mask size d (clipped to its upper bound) can only
// shrink densities, so the volume constraint is monotone non-increasing in
// delta; bisect delta until value <= 0. Returns false if even the largest
// admissible growth stays infeasible.
bool restore_feasibility(std::vector<double>& x, const OptProblem& problem,
                         const std::vector<Vec3>& centroids,
                         double element_volume) {
  const std::size_t tm = x.size() / 7;
  auto value_at = [&](double delta) {
    std::vector<double> xd = x;
    for (std::size_t j = 0; j < tm; ++j) {
      xd[7 * j + 6] = std::min(xd[7 * j + 6] + delta, problem.upper[7 * j + 6]);
    }
    const auto rho = density(unflatten(xd), centroids, problem.params);
    return std::make_pair(volume_constraint(rho, element_volume, problem.vf).first,
                          std::move(xd));
  };
  double dmax = 0.0;
  for (std::size_t j = 0; j < tm; ++j)
    dmax = std::max(dmax, problem.upper[7 * j + 6] - x[7 * j + 6]);
  if (value_at(dmax).first > 0.0) return false;
  double lo = 0.0, hi = dmax;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value_at(mid).first > 0.0 ? lo : hi) = mid;
  }
  x = value_at(hi).second;
  return true;
}

}  // namespace

OptResult run(const OptProblem& problem) {
  problem.validate();
  const Mesh& mesh = *problem.mesh;
  FemSystem fem(mesh, *problem.element);
  fem.set_bc(problem.bc);
  const std::vector<double>& f = fem.load_vector();
  const std::vector<Vec3>& centroids = mesh.centroids;
  const auto te = static_cast<std::size_t>(mesh.num_elements());
  const double v = fem.element_volume();
  const Simp simp{problem.params.eta, problem.params.rho_min};
  const double move_abs =
      problem.move > 0.0 ? problem.move : 2.0 * mesh.grid.edge_len;

  const std::size_t n = 7 * problem.masks.size();
  std::vector<double> x = flatten(problem.masks);
  std::vector<double> rng(n);
  for (std::size_t i = 0; i < n; ++i)
    rng[i] = std::max(problem.upper[i] - problem.lower[i], 1e-12);

  MmaOptimizer mma(problem.lower, problem.upper,
                   std::vector<double>(n, move_abs));

  OptResult result;
  result.u.assign(static_cast<std::size_t>(fem.ndof()), 0.0);
  double f0ref = 0.0;
  result.trace.status = "max_iter";

  for (std::int64_t iter = 1; iter <= problem.max_outer_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Mask> masks = unflatten(x);
    const std::vector<double> rho = density(masks, centroids, problem.params);
    std::vector<double> scale(te);
    for (std::size_t e = 0; e < te; ++e) scale[e] = simp.scale(rho[e]);

    const PcgResult pcg = fem.pcg_solve(scale, f, problem.pcg, result.u);
    auto [obj, dI] = fem.compliance_and_gradient(rho, simp, result.u, f);
    if (!std::isfinite(obj))
      throw std::runtime_error("opt: non-finite objective");
    if (f0ref == 0.0) f0ref = std::max(std::abs(obj), 1e-12);

    std::vector<double> dobj =
        density_jacobian_product(masks, centroids, problem.params, dI);
    for (double& g : dobj) g /= f0ref;

    const auto [cval, cgrad_rho] = volume_constraint(rho, v, problem.vf);
    const double vstar = problem.vf * static_cast<double>(te) * v;
    const double con = cval / vstar;  // normalized for the optimizer
    std::vector<double> dcon = density_jacobian_product(
        masks, centroids, problem.params,
        std::vector<double>(te, cgrad_rho[0] / vstar));

    std::vector<double> xnew;
    if (problem.algorithm == Algorithm::kMma) {
      xnew = mma.update(x, dobj, con, dcon);
    } else {
      // Projected-gradient fallback: step along -grad of the scaled
      // objective, capped at the move limit, then repair feasibility.
      double gmax = 0.0;
      for (double g : dobj) gmax = std::max(gmax, std::abs(g));
      const double step = gmax > 0.0 ? move_abs / gmax : 0.0;
      xnew.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        xnew[i] = std::clamp(x[i] - step * dobj[i],
                             std::max(problem.lower[i], x[i] - move_abs),
                             std::min(problem.upper[i], x[i] + move_abs));
      }
      restore_feasibility(xnew, problem, centroids, v);
    }

    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      dmax = std::max(dmax, std::abs(xnew[i] - x[i]) / rng[i]);
    x = std::move(xnew);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    TraceRecord rec{iter, obj, cval, dmax, pcg.iterations, secs};
    result.trace.records.push_back(rec);
    if (problem.on_iteration) problem.on_iteration(rec);

    if (problem.snapshot_interval > 0 && !problem.output_dir.empty() &&
        iter % problem.snapshot_interval == 0) {
      write_snapshot(problem, iter, unflatten(x));
    }
    if (dmax < problem.stagnation_tol) {
      result.trace.status = "stagnated";
      break;
    }
  }

  // Final design: restore feasibility if the volume budget is exceeded,
  // then evaluate the returned design once. A zero-iteration run returns
  // the initial masks untouched.
  if (problem.max_outer_iter > 0) {
    const std::vector<double> rho0 =
        density(unflatten(x), centroids, problem.params);
    if (volume_constraint(rho0, v, problem.vf).first > 0.0 &&
        !restore_feasibility(x, problem, centroids, v)) {
      result.trace.status = "infeasible";
    }
  }
  result.masks = unflatten(x);
  result.rho = density(result.masks, centroids, problem.params);
  result.constraint = volume_constraint(result.rho, v, problem.vf).first;
  if (problem.max_outer_iter > 0) {
    std::vector<double> scale(te);
    for (std::size_t e = 0; e < te; ++e)
      scale[e] = simp.scale(result.rho[e]);
    fem.pcg_solve(scale, f, problem.pcg, result.u);
    result.objective =
        fem.compliance_and_gradient(result.rho, simp, result.u, f).first;
  }
  return result;
}

}  // namespace kelvopt
