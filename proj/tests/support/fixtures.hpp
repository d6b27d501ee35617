#pragma once

#include <Eigen/Dense>

#include <vector>

#include "eigmg/assembly.hpp"
#include "eigmg/eigensolve.hpp"
#include "eigmg/mesh.hpp"
#include "support/oracle.hpp"

namespace fixture {

/// Assembled hierarchy plus dense-oracle spectra on every level.
struct Levels {
  eigmg::MeshHierarchy hierarchy;
  std::vector<eigmg::DiscreteForms> forms;
  std::vector<oracle::Pencil> spectra;
  std::vector<Eigen::MatrixXd> stiffness;

  /// a-normalized oracle eigenvector j on level k.
  Eigen::VectorXd eigvec(std::size_t k, int j) const {
    Eigen::VectorXd v = spectra[k].vectors.col(j);
    return v / std::sqrt(v.dot(stiffness[k] * v));
  }

  /// a-distance of v to the span of oracle eigenvectors [first, first + count) on level k.
  double distance(std::size_t k, const std::vector<double>& v, int first = 0, int count = 1) const {
    Eigen::VectorXd x = oracle::vec(v);
    x /= std::sqrt(x.dot(stiffness[k] * x));
    return oracle::a_distance(stiffness[k], spectra[k].vectors.middleCols(first, count), x);
  }
};

inline Levels make_levels(const eigmg::TriangleMesh& coarse, int n_levels, const eigmg::ProblemDefinition& problem,
                          bool with_spectra = true) {
  Levels l;
  l.hierarchy = eigmg::build_hierarchy(coarse, n_levels);
  l.forms = eigmg::assemble_hierarchy(l.hierarchy, problem);
  for (const auto& f : l.forms) {
    l.stiffness.push_back(oracle::dense(f.stiffness));
    if (with_spectra) l.spectra.push_back(oracle::eigen_pencil(l.stiffness.back(), oracle::dense(f.mass)));
  }
  return l;
}

inline eigmg::DiscreteForms dense_pencil_forms(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m, int level = 1) {
  eigmg::DiscreteForms f;
  std::vector<eigmg::Triplet> ta, tm;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) ta.push_back({i, j, a(i, j)});
      if (m(i, j) != 0.0) tm.push_back({i, j, m(i, j)});
    }
  }
  const int n = static_cast<int>(a.rows());
  f.stiffness = eigmg::SparseMatrix::from_triplets(n, n, ta);
  f.mass = eigmg::SparseMatrix::from_triplets(n, n, tm);
  f.free_dof_map.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f.free_dof_map[static_cast<std::size_t>(i)] = i;
  f.level = level;
  return f;
}

}  // namespace fixture
