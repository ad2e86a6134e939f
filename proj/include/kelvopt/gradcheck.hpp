#pragma once

#include <random>

#include "kelvopt/config.hpp"

namespace kelvopt {

/// Small cantilever (n x n x n, edge 0.25): left face clamped, a downward
/// load on the outer lower edge. Shared by the verification suites.
struct SmallCantilever {
  Mesh mesh;
  Element element;
  FemSystem fem;
  MmosParams params;

  explicit SmallCantilever(int n);
};

/// Each check returns the worst finite-difference mismatch it saw, measured
/// relative to the largest component of the analytical gradient (central
/// differences bottom out near eps*|f|/h, so near-zero components would
/// otherwise report pure roundoff).
double check_shape_gradients(std::mt19937& rng, int points = 200);
double check_mmos_gradients(std::mt19937& rng, int instances = 20);
double check_compliance_gradient(std::mt19937& rng, int components = 8);
double check_composed_gradient(std::mt19937& rng, int components = 10);

}  // namespace kelvopt
