#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "eigmg/sparse.hpp"

namespace eigmg {

/// Uniform refinement ratio h_k = h_{k-1} / kRefinementRatio.
inline constexpr int kRefinementRatio = 2;
/// Children per triangle under regular refinement (ratio^dim).
inline constexpr int kChildrenPerTriangle = kRefinementRatio * kRefinementRatio;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Triangle = std::array<int, 3>;

/// Two-dimensional P1 triangulation.
///
/// Invariants (checked by validate()):
///   - triangle indices address existing vertices;
///   - every triangle is counterclockwise with positive area;
///   - boundary[v] holds iff v lies on an edge owned by exactly one triangle;
///   - no two vertices coincide within 1e-12 of the domain diameter.
struct TriangleMesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::uint8_t> boundary;
  int level = 1;

  std::size_t num_vertices() const noexcept { return vertices.size(); }
  std::size_t num_triangles() const noexcept { return triangles.size(); }
  std::size_t num_free() const;

  double signed_area(std::size_t t) const;
  double total_area() const;
  double max_edge_length() const;
  double diameter() const;

  /// Vertex index -> free-unknown index, -1 for boundary vertices.
  std::vector<int> free_dof_map() const;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

/// Regular (n+1)^2 grid on the unit square, each cell split along the
/// lower-left to upper-right diagonal.
TriangleMesh generate_unit_square(int n);

/// Parse the plain-text mesh format:
///   nv nt
///   x y b      (nv lines, b in {0,1})
///   i j k      (nt lines, 0-based)
/// Lines whose first non-blank character is '#' are comments. Clockwise
/// triangles are re-oriented. Throws ParseError / ValidationError.
TriangleMesh load_mesh(std::string_view text);
TriangleMesh load_mesh_file(const std::string& path);

/// Flags of the topological boundary (vertices on edges owned by one triangle).
std::vector<std::uint8_t> topological_boundary(const TriangleMesh& mesh);

struct Refinement {
  TriangleMesh fine;
  /// parent[t_fine] = coarse triangle index.
  std::vector<int> parent;
};

/// Split every triangle into four congruent children through its edge
/// midpoints. Coarse vertices keep their indices; midpoints follow, ordered by
/// their sorted endpoint pair.
Refinement refine_regular(const TriangleMesh& mesh);

/// Linear interpolation from coarse free unknowns to fine free unknowns.
/// Throws ValidationError if `fine` is not the regular refinement of `coarse`.
SparseMatrix prolongation_matrix(const TriangleMesh& coarse, const TriangleMesh& fine,
                                 const std::vector<int>& parent);

struct MeshHierarchy {
  std::vector<TriangleMesh> levels;            // coarse -> fine
  std::vector<std::vector<int>> parent_maps;   // parent_maps[k]: level k+1 -> level k
  std::vector<SparseMatrix> prolongations;     // prolongations[k]: level k -> level k+1

  std::size_t size() const noexcept { return levels.size(); }
  const TriangleMesh& finest() const { return levels.back(); }
};

inline constexpr std::size_t kDefaultVertexBudget = 20'000'000;

/// Repeated regular refinement. Throws ResourceError before refining if the
/// finest level would exceed `vertex_budget` vertices.
MeshHierarchy build_hierarchy(const TriangleMesh& coarse, int n_levels,
                              std::size_t vertex_budget = kDefaultVertexBudget);

}  // namespace eigmg
