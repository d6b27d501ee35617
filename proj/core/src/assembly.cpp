#include "eigmg/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eigmg/error.hpp"

namespace eigmg {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("assemble: non-finite ") + what + " coefficient");
}

// Sparsity pattern of the free-unknown graph plus, for each triangle, the
// positions of its 3x3 local block inside the CSR value array.
struct Pattern {
  std::vector<int> offsets;
  std::vector<int> cols;
  std::vector<std::array<int, 9>> slots;
};

Pattern build_pattern(const TriangleMesh& mesh, const std::vector<int>& dof, int n) {
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
  for (const auto& tri : mesh.triangles) {
    for (int a : tri) {
      const int i = dof[a];
      if (i < 0) continue;
      for (int b : tri) {
        const int j = dof[b];
        if (j >= 0) adjacency[i].push_back(j);
      }
    }
  }
  Pattern p;
  p.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& row = adjacency[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    p.offsets[i + 1] = p.offsets[i] + static_cast<int>(row.size());
  }
  p.cols.reserve(static_cast<std::size_t>(p.offsets.back()));
  for (const auto& row : adjacency) p.cols.insert(p.cols.end(), row.begin(), row.end());

  p.slots.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        const int i = dof[tri[r]];
        const int j = dof[tri[c]];
        int slot = -1;
        if (i >= 0 && j >= 0) {
          const auto first = p.cols.begin() + p.offsets[i];
          const auto last = p.cols.begin() + p.offsets[i + 1];
          slot = static_cast<int>(std::lower_bound(first, last, j) - p.cols.begin());
        }
        p.slots[t][3 * r + c] = slot;
      }
    }
  }
  return p;
}

DiscreteForms assemble_with_dofs(const TriangleMesh& mesh, const ProblemDefinition& problem, std::vector<int> dof) {
  const int n = dof.empty() ? 0 : *std::max_element(dof.begin(), dof.end()) + 1;
  const Pattern pattern = build_pattern(mesh, dof, n);
  std::vector<double> k_vals(pattern.cols.size(), 0.0);
  std::vector<double> m_vals(pattern.cols.size(), 0.0);

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const LocalMatrices local =
        local_matrices(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], problem);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        const int slot = pattern.slots[t][3 * r + c];
        if (slot < 0) continue;
        k_vals[slot] += local.stiffness[r][c];
        m_vals[slot] += local.mass[r][c];
      }
    }
  }

  DiscreteForms forms;
  forms.stiffness = SparseMatrix(n, n, pattern.offsets, pattern.cols, std::move(k_vals));
  forms.mass = SparseMatrix(n, n, pattern.offsets, pattern.cols, std::move(m_vals));
  forms.free_dof_map = std::move(dof);
  forms.level = mesh.level;
  return forms;
}

}  // namespace

ProblemDefinition laplace_problem() {
  ProblemDefinition p;
  p.name = "laplace";
  p.diffusion = [](double, double) { return SymTensor2{1.0, 0.0, 1.0}; };
  p.potential = [](double, double) { return 0.0; };
  p.weight = [](double, double) { return 1.0; };
  p.constant_coefficients = true;
  return p;
}

ProblemDefinition general_ex2_problem() {
  ProblemDefinition p;
  p.name = "general-ex2";
  p.diffusion = [](double x, double y) {
    const double s = x - 0.5, t = y - 0.5;
    return SymTensor2{1.0 + s * s, s * t, 1.0 + t * t};
  };
  p.potential = [](double x, double y) { return std::exp((x - 0.5) * (y - 0.5)); };
  p.weight = [](double x, double y) { return 1.0 + (x - 0.5) * (y - 0.5); };
  p.constant_coefficients = false;
  return p;
}

ProblemDefinition problem_by_name(const std::string& name) {
  if (name == "laplace") return laplace_problem();
  if (name == "general-ex2") return general_ex2_problem();
  throw ConfigError("unknown problem '" + name + "' (expected laplace or general-ex2)");
}

LocalMatrices local_matrices(const Point& p0, const Point& p1, const Point& p2, const ProblemDefinition& problem) {
  const double x10 = p1.x - p0.x, y10 = p1.y - p0.y;
  const double x20 = p2.x - p0.x, y20 = p2.y - p0.y;
  const double det = x10 * y20 - x20 * y10;
  if (!(det > 0.0)) throw ValidationError("assemble: degenerate or clockwise triangle");
  const double area = 0.5 * det;

  // Constant P1 gradients.
  const std::array<std::array<double, 2>, 3> grad{{
      {(p1.y - p2.y) / det, (p2.x - p1.x) / det},
      {(p2.y - p0.y) / det, (p0.x - p2.x) / det},
      {(p0.y - p1.y) / det, (p1.x - p0.x) / det},
  }};

  // Edge-midpoint rule: exact for quadratics; barycentric coordinates of the
  // midpoints are permutations of (1/2, 1/2, 0).
  const std::array<Point, 3> qp{{
      {0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)},
      {0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)},
      {0.5 * (p2.x + p0.x), 0.5 * (p2.y + p0.y)},
  }};
  const std::array<std::array<double, 3>, 3> basis{{
      {0.5, 0.5, 0.0},
      {0.0, 0.5, 0.5},
      {0.5, 0.0, 0.5},
  }};
  const double w = area / 3.0;

  SymTensor2 diff_int{0.0, 0.0, 0.0};
  std::array<double, 3> phi{}, rho{};
  for (int q = 0; q < 3; ++q) {
    const SymTensor2 a = problem.diffusion(qp[q].x, qp[q].y);
    require_finite(a.a11, "diffusion");
    require_finite(a.a12, "diffusion");
    require_finite(a.a22, "diffusion");
    if (!(a.a11 > 0.0) || !(a.a11 * a.a22 - a.a12 * a.a12 > 0.0)) {
      throw ValidationError("assemble: diffusion tensor not symmetric positive definite at (" +
                            std::to_string(qp[q].x) + ", " + std::to_string(qp[q].y) + ")");
    }
    diff_int.a11 += w * a.a11;
    diff_int.a12 += w * a.a12;
    diff_int.a22 += w * a.a22;
    phi[q] = problem.potential(qp[q].x, qp[q].y);
    rho[q] = problem.weight(qp[q].x, qp[q].y);
    require_finite(phi[q], "potential");
    require_finite(rho[q], "weight");
    if (phi[q] < 0.0) throw ValidationError("assemble: negative potential at a quadrature point");
    if (!(rho[q] > 0.0)) throw ValidationError("assemble: non-positive weight at a quadrature point");
  }

  LocalMatrices out;
  for (int r = 0; r < 3; ++r) {
    for (int c = r; c < 3; ++c) {
      const auto& gr = grad[r];
      const auto& gc = grad[c];
      double k = diff_int.a11 * gr[0] * gc[0] + diff_int.a12 * (gr[0] * gc[1] + gr[1] * gc[0]) +
                 diff_int.a22 * gr[1] * gc[1];
      double m = 0.0;
      for (int q = 0; q < 3; ++q) {
        const double bb = basis[q][r] * basis[q][c];
        k += w * phi[q] * bb;
        m += w * rho[q] * bb;
      }
      out.stiffness[r][c] = out.stiffness[c][r] = k;
      out.mass[r][c] = out.mass[c][r] = m;
    }
  }
  return out;
}

DiscreteForms assemble(const TriangleMesh& mesh, const ProblemDefinition& problem) {
  return assemble_with_dofs(mesh, problem, mesh.free_dof_map());
}

DiscreteForms assemble_full(const TriangleMesh& mesh, const ProblemDefinition& problem) {
  std::vector<int> dof(mesh.vertices.size());
  std::iota(dof.begin(), dof.end(), 0);
  return assemble_with_dofs(mesh, problem, std::move(dof));
}

std::vector<DiscreteForms> assemble_hierarchy(const MeshHierarchy& hierarchy, const ProblemDefinition& problem) {
  std::vector<DiscreteForms> forms;
  forms.reserve(hierarchy.size());
  for (const auto& mesh : hierarchy.levels) forms.push_back(assemble(mesh, problem));
  return forms;
}

double a_inner(const DiscreteForms& forms, std::span<const double> v, std::span<const double> w) {
  if (v.size() != static_cast<std::size_t>(forms.size()) || w.size() != v.size()) {
    throw DimensionError("a_inner: vector length does not match the number of free unknowns");
  }
  return dot(v, forms.stiffness * w);
}

double b_inner(const DiscreteForms& forms, std::span<const double> v, std::span<const double> w) {
  if (v.size() != static_cast<std::size_t>(forms.size()) || w.size() != v.size()) {
    throw DimensionError("b_inner: vector length does not match the number of free unknowns");
  }
  // Symmetric in (v, w) exactly: M is symmetric and the products pair up term by term.
  const auto offsets = forms.mass.row_offsets();
  const auto cols = forms.mass.col_indices();
  const auto vals = forms.mass.values();
  double s = 0.0;
  for (int i = 0; i < forms.size(); ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      const int j = cols[k];
      s += vals[k] * (v[i] * w[j] + v[j] * w[i]);
    }
  }
  return 0.5 * s;
}

double energy_norm(const DiscreteForms& forms, std::span<const double> v) {
  return std::sqrt(std::max(0.0, a_inner(forms, v, v)));
}

}  // namespace eigmg
