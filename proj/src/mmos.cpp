#include "kelvopt/mmos.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kelvopt {

namespace {

// Stable logistic 1/(1+exp(-t)); exponent clamped so exp never overflows.
double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-std::min(t, 500.0)));
  }
  const double e = std::exp(std::max(t, -500.0));
  return e / (1.0 + e);
}

// log(logistic(t)), stable on both tails.
double log_logistic(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-std::min(t, 500.0)));
  return t - std::log1p(std::exp(std::max(t, -500.0)));
}

}  // namespace

double Mask::psi(int k) const {
  switch (k) {
    case 0: return f1.x();
    case 1: return f1.y();
    case 2: return f1.z();
    case 3: return f2.x();
    case 4: return f2.y();
    case 5: return f2.z();
    case 6: return d;
    default: throw std::out_of_range("Mask::psi: k must be in 0..6");
  }
}

void Mask::set_psi(int k, double value) {
  switch (k) {
    case 0: f1.x() = value; break;
    case 1: f1.y() = value; break;
    case 2: f1.z() = value; break;
    case 3: f2.x() = value; break;
    case 4: f2.y() = value; break;
    case 5: f2.z() = value; break;
    case 6: d = value; break;
    default: throw std::out_of_range("Mask::set_psi: k must be in 0..6");
  }
}

void MmosParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("mmos: alpha must be > 0");
  if (epsilon < 0.0) throw std::invalid_argument("mmos: epsilon must be >= 0");
  if (!(rho_min > 0.0) || rho_min >= 1.0)
    throw std::invalid_argument("mmos: rho_min must be in (0,1)");
  if (eta < 1.0) throw std::invalid_argument("mmos: eta must be >= 1");
}

double phi(const Mask& mask, const Vec3& x) {
  return (x - mask.f1).norm() + (x - mask.f2).norm() -
         (mask.f1 - mask.f2).norm() - mask.d;
}

std::pair<double, double> semi_axes(const Mask& mask) {
  if (mask.d < 0.0) return {0.0, 0.0};
  const double a = ((mask.f1 - mask.f2).norm() + mask.d) / 2.0;
  const double b = std::sqrt((2.0 * a - mask.d / 2.0) * (mask.d / 2.0));
  return {a, b};
}

double mask_value(const Mask& mask, const Vec3& x, const MmosParams& params) {
  return logistic(params.alpha * phi(mask, x));
}

double resolve_epsilon(const MmosParams& params,
                       const std::vector<Vec3>& centroids) {
  if (params.epsilon > 0.0) return params.epsilon;
  if (centroids.empty()) return 1e-8;
  Vec3 lo = centroids.front(), hi = centroids.front();
  for (const Vec3& c : centroids) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const double diag = (hi - lo).norm();
  return 1e-8 * (diag > 0.0 ? diag : 1.0);
}

std::vector<double> density(const std::vector<Mask>& masks,
                            const std::vector<Vec3>& centroids,
                            const MmosParams& params) {
  params.validate();
  const std::int64_t te = static_cast<std::int64_t>(centroids.size());
  std::vector<double> rho(static_cast<std::size_t>(te), 1.0);
  const bool log_space = masks.size() > 64;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < te; ++i) {
    const Vec3& x = centroids[static_cast<std::size_t>(i)];
    if (log_space) {
      double acc = 0.0;
      for (const Mask& m : masks) acc += log_logistic(params.alpha * phi(m, x));
      rho[static_cast<std::size_t>(i)] = std::exp(acc);
    } else {
      double acc = 1.0;
      for (const Mask& m : masks) acc *= logistic(params.alpha * phi(m, x));
      rho[static_cast<std::size_t>(i)] = acc;
    }
  }
  return rho;
}

std::vector<double> density_jacobian_product(
    const std::vector<Mask>& masks, const std::vector<Vec3>& centroids,
    const MmosParams& params, const std::vector<double>& dI_drho) {
  params.validate();
  if (dI_drho.size() != centroids.size()) {
    throw std::invalid_argument(
        "density_jacobian_product: dI_drho size != centroid count");
  }
  const std::vector<double> rho = density(masks, centroids, params);
  const double eps = resolve_epsilon(params, centroids);
  const std::int64_t tm = static_cast<std::int64_t>(masks.size());
  const std::int64_t te = static_cast<std::int64_t>(centroids.size());
  std::vector<double> grad(static_cast<std::size_t>(7 * tm), 0.0);

#pragma omp parallel for schedule(static)
  for (std::int64_t J = 0; J < tm; ++J) {
    const Mask& m = masks[static_cast<std::size_t>(J)];
    const double d12 = (m.f1 - m.f2).norm();
    const Vec3 dir12 = (m.f1 - m.f2) / (d12 + eps);
    double g[7] = {0, 0, 0, 0, 0, 0, 0};
    for (std::int64_t i = 0; i < te; ++i) {
      const Vec3& x = centroids[static_cast<std::size_t>(i)];
      const double d1 = (x - m.f1).norm();
      const double d2 = (x - m.f2).norm();
      const double h = logistic(params.alpha * (d1 + d2 - d12 - m.d));
      // d rho_i / d psi_k = alpha * rho_i * (1 - h_J) * d phi / d psi_k
      const double t = dI_drho[static_cast<std::size_t>(i)] * params.alpha *
                       rho[static_cast<std::size_t>(i)] * (1.0 - h);
      if (t == 0.0) continue;
      const Vec3 g1 = (m.f1 - x) / (d1 + eps) - dir12;
      const Vec3 g2 = (m.f2 - x) / (d2 + eps) + dir12;
      g[0] += t * g1.x();
      g[1] += t * g1.y();
      g[2] += t * g1.z();
      g[3] += t * g2.x();
      g[4] += t * g2.y();
      g[5] += t * g2.z();
      g[6] -= t;
    }
    for (int k = 0; k < 7; ++k) grad[static_cast<std::size_t>(7 * J + k)] = g[k];
  }
  return grad;
}

void write_masks(const std::vector<Mask>& masks, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  char buf[200];
  for (const Mask& m : masks) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", m.f1.x(),
                  m.f1.y(), m.f1.z(), m.f2.x(), m.f2.y(), m.f2.z(), m.d);
    os << buf;
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<Mask> read_masks(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<Mask> masks;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double v[7];
    for (int k = 0; k < 7; ++k) {
      if (!(ls >> v[k])) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected 7 numeric fields per mask");
      }
    }
    Mask m;
    m.f1 = Vec3(v[0], v[1], v[2]);
    m.f2 = Vec3(v[3], v[4], v[5]);
    m.d = v[6];
    masks.push_back(m);
  }
  return masks;
}

}  // namespace kelvopt
