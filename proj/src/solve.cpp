#include "kelvopt/solve.hpp"

#include <cmath>
#include <stdexcept>

namespace kelvopt {

namespace {

constexpr int kBlock = 48;  // elements per gather/GEMM/scatter block

using VecX = Eigen::VectorXd;
using MapV = Eigen::Map<VecX>;
using CMapV = Eigen::Map<const VecX>;

}  // namespace

void BoundaryConditions::validate(std::int64_t ndof) const {
  std::vector<std::uint8_t> is_fixed(static_cast<std::size_t>(ndof), 0);
  for (std::int64_t d : fixed_dofs) {
    if (d < 0 || d >= ndof)
      throw std::invalid_argument("bc: fixed dof out of range");
    is_fixed[static_cast<std::size_t>(d)] = 1;
  }
  std::int64_t nfixed = 0;
  for (std::uint8_t f : is_fixed) nfixed += f;
  if (nfixed < 6)
    throw std::invalid_argument("bc: at least 6 DOFs must be fixed");
  for (const auto& [d, mag] : loads) {
    if (d < 0 || d >= ndof)
      throw std::invalid_argument("bc: loaded dof out of range");
    if (is_fixed[static_cast<std::size_t>(d)] && mag != 0.0)
      throw std::invalid_argument("bc: dof both fixed and loaded");
  }
}

FemSystem::FemSystem(const Mesh& mesh, const Element& element)
    : num_elements_(mesh.num_elements()),
      ndof_(3 * mesh.num_nodes()),
      k0_(element.k0),
      k0_diag_(element.k0.diagonal()) {
  const double l = mesh.grid.edge_len;
  element_volume_ = 8.0 * std::sqrt(2.0) * l * l * l;

  dofmap_.resize(static_cast<std::size_t>(num_elements_) * 72);
  for (std::int64_t e = 0; e < num_elements_; ++e) {
    const auto& row = mesh.conn[static_cast<std::size_t>(e)];
    for (int ln = 0; ln < 24; ++ln) {
      for (int c = 0; c < 3; ++c) {
        dofmap_[static_cast<std::size_t>(72 * e + 3 * ln + c)] =
            3 * row[static_cast<std::size_t>(ln)] + c;
      }
    }
  }
  // Two elements share a node only if their lattice indices differ by at
  // most one in every direction, so parity classes never collide.
  for (std::int64_t e = 0; e < num_elements_; ++e) {
    const auto& c = mesh.cells[static_cast<std::size_t>(e)];
    colors_[(c[0] % 2) + 2 * (c[1] % 2) + 4 * (c[2] % 2)].push_back(e);
  }
  fixed_.assign(static_cast<std::size_t>(ndof_), 0);
  load_.assign(static_cast<std::size_t>(ndof_), 0.0);
}

void FemSystem::set_bc(const BoundaryConditions& bc) {
  bc.validate(ndof_);
  fixed_.assign(static_cast<std::size_t>(ndof_), 0);
  for (std::int64_t d : bc.fixed_dofs) fixed_[static_cast<std::size_t>(d)] = 1;
  load_.assign(static_cast<std::size_t>(ndof_), 0.0);
  for (const auto& [d, mag] : bc.loads) {
    if (!fixed_[static_cast<std::size_t>(d)])
      load_[static_cast<std::size_t>(d)] += mag;
  }
}

void FemSystem::apply_stiffness(const std::vector<double>& scale,
                                const std::vector<double>& u,
                                std::vector<double>& y) const {
  if (scale.size() != static_cast<std::size_t>(num_elements_) ||
      u.size() != static_cast<std::size_t>(ndof_)) {
    throw std::invalid_argument("apply_stiffness: bad input sizes");
  }
  y.assign(static_cast<std::size_t>(ndof_), 0.0);
  for (const auto& color : colors_) {
    const std::int64_t n = static_cast<std::int64_t>(color.size());
    const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel
    {
      Eigen::Matrix<double, 72, Eigen::Dynamic> ue(72, kBlock), fe(72, kBlock);
#pragma omp for schedule(static)
      for (std::int64_t blk = 0; blk < nblocks; ++blk) {
        const std::int64_t b0 = blk * kBlock;
        const int bn = static_cast<int>(std::min<std::int64_t>(kBlock, n - b0));
        for (int c = 0; c < bn; ++c) {
          const std::int64_t* map =
              &dofmap_[static_cast<std::size_t>(72 * color[b0 + c])];
          for (int r = 0; r < 72; ++r)
            ue(r, c) = u[static_cast<std::size_t>(map[r])];
        }
        fe.leftCols(bn).noalias() = k0_ * ue.leftCols(bn);
        for (int c = 0; c < bn; ++c) {
          const std::int64_t e = color[b0 + c];
          const double s = scale[static_cast<std::size_t>(e)];
          const std::int64_t* map = &dofmap_[static_cast<std::size_t>(72 * e)];
          for (int r = 0; r < 72; ++r)
            y[static_cast<std::size_t>(map[r])] += s * fe(r, c);
        }
      }
    }
  }
}

std::vector<double> FemSystem::build_preconditioner(
    const std::vector<double>& scale) const {
  if (scale.size() != static_cast<std::size_t>(num_elements_))
    throw std::invalid_argument("build_preconditioner: bad scale size");
  std::vector<double> m(static_cast<std::size_t>(ndof_), 0.0);
  for (const auto& color : colors_) {
    const std::int64_t n = static_cast<std::int64_t>(color.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t idx = 0; idx < n; ++idx) {
      const std::int64_t e = color[idx];
      const double s = scale[static_cast<std::size_t>(e)];
      const std::int64_t* map = &dofmap_[static_cast<std::size_t>(72 * e)];
      for (int r = 0; r < 72; ++r)
        m[static_cast<std::size_t>(map[r])] += s * k0_diag_[r];
    }
  }
  for (std::int64_t d = 0; d < ndof_; ++d) {
    if (fixed_[static_cast<std::size_t>(d)]) {
      m[static_cast<std::size_t>(d)] = 1.0;
    } else if (!(m[static_cast<std::size_t>(d)] > 0.0)) {
      throw std::runtime_error("preconditioner: nonpositive diagonal entry");
    }
  }
  return m;
}

PcgResult FemSystem::pcg_solve(const std::vector<double>& scale,
                               const std::vector<double>& f,
                               const PcgSettings& settings,
                               std::vector<double>& u,
                               std::vector<double>* history) const {
  if (f.size() != static_cast<std::size_t>(ndof_) ||
      u.size() != static_cast<std::size_t>(ndof_)) {
    throw std::invalid_argument("pcg_solve: bad input sizes");
  }
  if (!(settings.rel_tol > 0.0) || settings.rel_tol >= 1.0 ||
      settings.max_iter < 1) {
    throw std::invalid_argument("pcg_solve: bad settings");
  }
  const std::vector<double> mdiag = build_preconditioner(scale);
  const auto nd = static_cast<std::size_t>(ndof_);
  CMapV m(mdiag.data(), ndof_);
  MapV x(u.data(), ndof_);

  VecX b = CMapV(f.data(), ndof_);
  for (std::size_t d = 0; d < nd; ++d) {
    if (fixed_[d]) {
      b[static_cast<Eigen::Index>(d)] = 0.0;
      x[static_cast<Eigen::Index>(d)] = 0.0;
    }
  }
  const double bnorm = b.norm();
  if (history) history->clear();
  PcgResult result;
  if (bnorm == 0.0) {
    x.setZero();
    result.converged = true;
    return result;
  }

  auto op = [&](const VecX& in, VecX& out, std::vector<double>& in_buf,
                std::vector<double>& out_buf) {
    Eigen::Map<VecX>(in_buf.data(), ndof_) = in;
    for (std::size_t d = 0; d < nd; ++d)
      if (fixed_[d]) in_buf[d] = 0.0;
    apply_stiffness(scale, in_buf, out_buf);
    out = MapV(out_buf.data(), ndof_);
    for (std::size_t d = 0; d < nd; ++d)
      if (fixed_[d]) out[static_cast<Eigen::Index>(d)] = 0.0;
  };
  std::vector<double> in_buf(nd), out_buf(nd);

  VecX r(ndof_), ap(ndof_), tmp(ndof_);
  op(x, r, in_buf, out_buf);
  r = b - r;

  // Smoothed sequence (v, s): convex combinations of the CG iterates chosen
  // to minimize the preconditioned residual norm, which therefore never
  // increases. v carries the returned solution.
  VecX v = x;
  VecX s = r;
  double s_norm_m = std::sqrt(s.cwiseQuotient(m).dot(s));
  if (history) history->push_back(s_norm_m);

  VecX z = r.cwiseQuotient(m);
  VecX p = z;
  double rz = r.dot(z);

  while (s.norm() > settings.rel_tol * bnorm &&
         result.iterations < settings.max_iter) {
    op(p, ap, in_buf, out_buf);
    const double pap = p.dot(ap);
    if (!std::isfinite(pap) || pap <= 0.0)
      throw std::runtime_error("pcg: numerical breakdown (operator not PD)");
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;

    tmp = r - s;
    const double wmw = tmp.cwiseQuotient(m).dot(tmp);
    double eta = 1.0;
    if (wmw > 0.0) {
      eta = std::min(1.0, std::max(0.0, -s.cwiseQuotient(m).dot(tmp) / wmw));
    }
    s += eta * tmp;
    v += eta * (x - v);
    s_norm_m = std::sqrt(s.cwiseQuotient(m).dot(s));
    if (!std::isfinite(s_norm_m))
      throw std::runtime_error("pcg: numerical breakdown (non-finite residual)");
    if (history) history->push_back(s_norm_m);

    z = r.cwiseQuotient(m);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    ++result.iterations;
  }
  result.converged = s.norm() <= settings.rel_tol * bnorm;

  x = v;
  op(x, tmp, in_buf, out_buf);  // report the true residual of the answer
  result.rel_residual = (b - tmp).norm() / bnorm;
  return result;
}

std::pair<double, std::vector<double>> FemSystem::compliance_and_gradient(
    const std::vector<double>& rho, const Simp& simp,
    const std::vector<double>& u, const std::vector<double>& f) const {
  if (rho.size() != static_cast<std::size_t>(num_elements_) ||
      u.size() != static_cast<std::size_t>(ndof_) ||
      f.size() != static_cast<std::size_t>(ndof_)) {
    throw std::invalid_argument("compliance_and_gradient: bad input sizes");
  }
  double obj = 0.0;
  for (std::size_t d = 0; d < static_cast<std::size_t>(ndof_); ++d)
    obj += u[d] * f[d];
  obj *= 0.5;

  std::vector<double> grad(static_cast<std::size_t>(num_elements_), 0.0);
  const std::int64_t nblocks = (num_elements_ + kBlock - 1) / kBlock;
#pragma omp parallel
  {
    Eigen::Matrix<double, 72, Eigen::Dynamic> ue(72, kBlock), ke(72, kBlock);
#pragma omp for schedule(static)
    for (std::int64_t blk = 0; blk < nblocks; ++blk) {
      const std::int64_t b0 = blk * kBlock;
      const int bn =
          static_cast<int>(std::min<std::int64_t>(kBlock, num_elements_ - b0));
      for (int c = 0; c < bn; ++c) {
        const std::int64_t* map =
            &dofmap_[static_cast<std::size_t>(72 * (b0 + c))];
        for (int r = 0; r < 72; ++r)
          ue(r, c) = u[static_cast<std::size_t>(map[r])];
      }
      ke.leftCols(bn).noalias() = k0_ * ue.leftCols(bn);
      for (int c = 0; c < bn; ++c) {
        const double energy = ue.col(c).dot(ke.col(c));  // ue.K0.ue >= 0
        grad[static_cast<std::size_t>(b0 + c)] =
            -0.5 * simp.dscale(rho[static_cast<std::size_t>(b0 + c)]) * energy;
      }
    }
  }
  return {obj, std::move(grad)};
}

}  // namespace kelvopt
