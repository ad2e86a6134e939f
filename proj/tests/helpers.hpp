#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "kelvopt/solve.hpp"

namespace kelvopt::testing {

/// Explicitly assembled global stiffness, the oracle for the matrix-free
/// operator. Only for small meshes (dense storage).
inline Eigen::MatrixXd assemble_dense(const Mesh& mesh, const Element& element,
                                      const std::vector<double>& scale) {
  const auto ndof = static_cast<Eigen::Index>(3 * mesh.num_nodes());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ndof, ndof);
  for (std::int64_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& conn = mesh.conn[static_cast<std::size_t>(e)];
    std::array<Eigen::Index, 72> dofs{};
    for (int i = 0; i < 24; ++i) {
      for (int c = 0; c < 3; ++c)
        dofs[static_cast<std::size_t>(3 * i + c)] =
            static_cast<Eigen::Index>(3 * conn[static_cast<std::size_t>(i)] + c);
    }
    const double s = scale[static_cast<std::size_t>(e)];
    for (int a = 0; a < 72; ++a)
      for (int b = 0; b < 72; ++b)
        k(dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)]) +=
            s * element.k0(a, b);
  }
  return k;
}

/// How many elements reference each node.
inline std::vector<int> node_valence(const Mesh& mesh) {
  std::vector<int> count(static_cast<std::size_t>(mesh.num_nodes()), 0);
  for (const auto& conn : mesh.conn)
    for (std::int64_t g : conn) ++count[static_cast<std::size_t>(g)];
  return count;
}

/// Unique scratch directory under the system temp dir, removed on scope
/// exit.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate =
          base / ("kelvopt_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(i));
      if (std::filesystem::create_directory(candidate)) {
        path = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace kelvopt::testing
