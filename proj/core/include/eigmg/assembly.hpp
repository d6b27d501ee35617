#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eigmg/mesh.hpp"
#include "eigmg/sparse.hpp"

namespace eigmg {

/// Symmetric 2x2 coefficient {a11, a12, a22}.
struct SymTensor2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;
};

/// -div(A grad u) + phi u = lambda rho u on the mesh domain, u = 0 on the boundary.
struct ProblemDefinition {
  std::string name;
  std::function<SymTensor2(double, double)> diffusion;
  std::function<double(double, double)> potential;
  std::function<double(double, double)> weight;
  /// True when diffusion, potential and weight are constant, so the forms are
  /// integrated exactly and nested levels satisfy the Galerkin identity.
  bool constant_coefficients = false;
};

/// A = I, phi = 0, rho = 1.
ProblemDefinition laplace_problem();

/// Variable-coefficient problem on the unit square with s = x-1/2, t = y-1/2:
///   A   = [[1 + s^2, s t], [s t, 1 + t^2]]
///   phi = exp(s t)
///   rho = 1 + s t
ProblemDefinition general_ex2_problem();

/// Built-in problems: "laplace", "general-ex2". Throws ConfigError otherwise.
ProblemDefinition problem_by_name(const std::string& name);

/// Stiffness a(.,.) and mass b(.,.) restricted to free unknowns.
struct DiscreteForms {
  SparseMatrix stiffness;
  SparseMatrix mass;
  /// Vertex index -> free index (-1 on eliminated Dirichlet vertices).
  std::vector<int> free_dof_map;
  int level = 1;

  int size() const noexcept { return stiffness.rows(); }
};

struct LocalMatrices {
  std::array<std::array<double, 3>, 3> stiffness{};
  std::array<std::array<double, 3>, 3> mass{};
};

/// Element matrices of one counterclockwise triangle.
LocalMatrices local_matrices(const Point& p0, const Point& p1, const Point& p2, const ProblemDefinition& problem);

/// Galerkin P1 assembly with homogeneous Dirichlet elimination.
DiscreteForms assemble(const TriangleMesh& mesh, const ProblemDefinition& problem);

/// Same, keeping every vertex as an unknown (no boundary elimination).
DiscreteForms assemble_full(const TriangleMesh& mesh, const ProblemDefinition& problem);

/// One set of forms per hierarchy level.
std::vector<DiscreteForms> assemble_hierarchy(const MeshHierarchy& hierarchy, const ProblemDefinition& problem);

/// sqrt(v^T A v)
double energy_norm(const DiscreteForms& forms, std::span<const double> v);
/// v^T A w
double a_inner(const DiscreteForms& forms, std::span<const double> v, std::span<const double> w);
/// v^T M w
double b_inner(const DiscreteForms& forms, std::span<const double> v, std::span<const double> w);

}  // namespace eigmg
