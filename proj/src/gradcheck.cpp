#include "kelvopt/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "kelvopt/shape.hpp"

namespace kelvopt {

SmallCantilever::SmallCantilever(int n)
    : mesh(build_mesh(GridSpec{n, n, n, 0.25})),
      element(0.25, Material{}),
      fem(mesh, element) {
  BoundaryConditions bc;
  for (std::int64_t nd = 0; nd < mesh.num_nodes(); ++nd) {
    if (mesh.nodes[static_cast<std::size_t>(nd)].x() <= 1e-9) {
      for (int c = 0; c < 3; ++c) bc.fixed_dofs.push_back(3 * nd + c);
    }
  }
  double cx_max = 0.0, cy_min = 1e30;
  for (const Vec3& c : mesh.centroids) cx_max = std::max(cx_max, c.x());
  for (const Vec3& c : mesh.centroids) {
    if (std::abs(c.x() - cx_max) < 1e-9) cy_min = std::min(cy_min, c.y());
  }
  for (std::int64_t e = 0; e < mesh.num_elements(); ++e) {
    const Vec3& c = mesh.centroids[static_cast<std::size_t>(e)];
    if (std::abs(c.x() - cx_max) < 1e-9 && std::abs(c.y() - cy_min) < 1e-9) {
      for (int ln : {22, 23}) {
        const std::int64_t g =
            mesh.conn[static_cast<std::size_t>(e)][static_cast<std::size_t>(ln - 1)];
        bc.loads.emplace_back(3 * g + 1, -0.125);
      }
    }
  }
  fem.set_bc(bc);
}

double check_shape_gradients(std::mt19937& rng, int points) {
  const ShapeContext& ctx = shape_context();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const UnitCell cell = unit_cell(std::sqrt(2.0));
  Vec3 lo = cell.master[0], hi = cell.master[0];
  for (const Vec3& v : cell.master) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  double worst = 0.0;
  const double h = 1e-6;
  int tested = 0;
  while (tested < points) {
    Vec3 x;
    for (int c = 0; c < 3; ++c) x[c] = lo[c] + unit(rng) * (hi[c] - lo[c]);
    bool inside = true;
    for (const Face& f : ctx.faces) {
      if (f.dist - f.normal.dot(x) < 1e-3) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    ++tested;
    const auto grads = shape_gradients(ctx, x);
    for (int c = 0; c < 3; ++c) {
      Vec3 xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const auto np = shape_values(ctx, xp);
      const auto nm = shape_values(ctx, xm);
      for (int I = 0; I < 24; ++I) {
        const double fd = (np[I] - nm[I]) / (2.0 * h);
        const double an = grads(I, c);
        if (std::abs(an) > 1e-10)
          worst = std::max(worst, std::abs(fd - an) / std::abs(an));
      }
    }
  }
  return worst;
}

double check_mmos_gradients(std::mt19937& rng, int instances) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    const int tm = 2 + static_cast<int>(unit(rng) * 4);
    const int te = 20 + static_cast<int>(unit(rng) * 30);
    std::vector<Vec3> pts(static_cast<std::size_t>(te));
    for (Vec3& p : pts)
      for (int c = 0; c < 3; ++c) p[c] = 10.0 * unit(rng) - 5.0;
    std::vector<Mask> masks(static_cast<std::size_t>(tm));
    for (Mask& m : masks) {
      for (int c = 0; c < 3; ++c) {
        m.f1[c] = 8.0 * unit(rng) - 4.0;
        m.f2[c] = 8.0 * unit(rng) - 4.0;
      }
      m.d = 0.5 + 3.0 * unit(rng);
    }
    std::vector<double> w(static_cast<std::size_t>(te));
    for (double& v : w) v = 2.0 * unit(rng) - 1.0;

    MmosParams params;
    params.epsilon = 1e-8;
    const auto grad = density_jacobian_product(masks, pts, params, w);
    auto scalar = [&](const std::vector<Mask>& ms) {
      const auto rho = density(ms, pts, params);
      double s = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) s += w[i] * rho[i];
      return s;
    };
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    const double h = 1e-6;
    for (int j = 0; j < tm; ++j) {
      for (int k = 0; k < 7; ++k) {
        auto mp = masks, mm = masks;
        mp[static_cast<std::size_t>(j)].set_psi(k, masks[static_cast<std::size_t>(j)].psi(k) + h);
        mm[static_cast<std::size_t>(j)].set_psi(k, masks[static_cast<std::size_t>(j)].psi(k) - h);
        const double fd = (scalar(mp) - scalar(mm)) / (2.0 * h);
        const double an = grad[static_cast<std::size_t>(7 * j + k)];
        if (gmax > 0.0) worst = std::max(worst, std::abs(fd - an) / gmax);
      }
    }
  }
  return worst;
}

double check_compliance_gradient(std::mt19937& rng, int components) {
  SmallCantilever sp(3);
  const auto te = static_cast<std::size_t>(sp.mesh.num_elements());
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  std::vector<double> rho(te);
  for (double& r : rho) r = unit(rng);
  const Simp simp;
  const PcgSettings settings{1e-12, 200000};

  auto solve_obj = [&](const std::vector<double>& r, std::vector<double>& u) {
    std::vector<double> scale(te);
    for (std::size_t e = 0; e < te; ++e) scale[e] = simp.scale(r[e]);
    sp.fem.pcg_solve(scale, sp.fem.load_vector(), settings, u);
    return sp.fem.compliance_and_gradient(r, simp, u, sp.fem.load_vector())
        .first;
  };
  std::vector<double> u(static_cast<std::size_t>(sp.fem.ndof()), 0.0);
  solve_obj(rho, u);
  const auto grad =
      sp.fem.compliance_and_gradient(rho, simp, u, sp.fem.load_vector())
          .second;

  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  double worst = 0.0;
  const double h = 1e-6;
  std::uniform_int_distribution<std::size_t> pick(0, te - 1);
  for (int t = 0; t < components; ++t) {
    const std::size_t e = pick(rng);
    auto rp = rho, rm = rho;
    rp[e] += h;
    rm[e] -= h;
    std::vector<double> up(u), um(u);
    const double op = solve_obj(rp, up);
    const double om = solve_obj(rm, um);
    const double fd = (op - om) / (2.0 * h);
    if (gmax > 0.0) worst = std::max(worst, std::abs(fd - grad[e]) / gmax);
  }
  return worst;
}

double check_composed_gradient(std::mt19937& rng, int components) {
  SmallCantilever sp(5);
  const auto& centroids = sp.mesh.centroids;
  const auto te = static_cast<std::size_t>(sp.mesh.num_elements());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Vec3 lo = centroids.front(), hi = centroids.front();
  for (const Vec3& c : centroids) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  std::vector<Mask> masks(8);
  for (Mask& m : masks) {
    Vec3 ctr;
    for (int c = 0; c < 3; ++c)
      ctr[c] = lo[c] + (0.2 + 0.6 * unit(rng)) * (hi[c] - lo[c]);
    m.f1 = ctr - Vec3(0.5, 0, 0);
    m.f2 = ctr + Vec3(0.5, 0, 0);
    m.d = 0.5 + 1.5 * unit(rng);
  }
  const Simp simp;
  const PcgSettings settings{1e-12, 200000};

  auto objective = [&](const std::vector<Mask>& ms, std::vector<double>& u) {
    const auto rho = density(ms, centroids, sp.params);
    std::vector<double> scale(te);
    for (std::size_t e = 0; e < te; ++e) scale[e] = simp.scale(rho[e]);
    sp.fem.pcg_solve(scale, sp.fem.load_vector(), settings, u);
    return sp.fem.compliance_and_gradient(rho, simp, u, sp.fem.load_vector())
        .first;
  };
  std::vector<double> u(static_cast<std::size_t>(sp.fem.ndof()), 0.0);
  objective(masks, u);
  const auto rho = density(masks, centroids, sp.params);
  const auto dI =
      sp.fem.compliance_and_gradient(rho, simp, u, sp.fem.load_vector())
          .second;
  const auto grad = density_jacobian_product(masks, centroids, sp.params, dI);

  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  double worst = 0.0;
  const double h = 1e-6;
  std::uniform_int_distribution<std::size_t> pick(0, 7 * masks.size() - 1);
  for (int t = 0; t < components; ++t) {
    const std::size_t i = pick(rng);
    auto mp = masks, mm = masks;
    const int k = static_cast<int>(i % 7);
    const std::size_t j = i / 7;
    mp[j].set_psi(k, masks[j].psi(k) + h);
    mm[j].set_psi(k, masks[j].psi(k) - h);
    std::vector<double> up(u), um(u);
    const double fd = (objective(mp, up) - objective(mm, um)) / (2.0 * h);
    if (gmax > 0.0) worst = std::max(worst, std::abs(fd - grad[i]) / gmax);
  }
  return worst;
}

}  // namespace kelvopt
