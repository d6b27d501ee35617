#include "eigmg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>

#include "eigmg/error.hpp"

namespace eigmg {
namespace {

using Edge = std::pair<int, int>;

Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

double cross(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// Edge -> number of owning triangles, keyed by sorted endpoint pair.
std::map<Edge, int> edge_multiplicity(const TriangleMesh& mesh) {
  std::map<Edge, int> edges;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) ++edges[make_edge(t[e], t[(e + 1) % 3])];
  }
  return edges;
}

}  // namespace

std::size_t TriangleMesh::num_free() const {
  return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), std::uint8_t{0}));
}

double TriangleMesh::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double TriangleMesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += signed_area(t);
  return a;
}

double TriangleMesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& t : triangles) {
    for (int e = 0; e < 3; ++e) {
      const Point& p = vertices[t[e]];
      const Point& q = vertices[t[(e + 1) % 3]];
      h = std::max(h, std::hypot(p.x - q.x, p.y - q.y));
    }
  }
  return h;
}

double TriangleMesh::diameter() const {
  if (vertices.empty()) return 0.0;
  double xmin = vertices[0].x, xmax = xmin, ymin = vertices[0].y, ymax = ymin;
  for (const auto& p : vertices) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

std::vector<int> TriangleMesh::free_dof_map() const {
  std::vector<int> map(vertices.size(), -1);
  int next = 0;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    if (!boundary[v]) map[v] = next++;
  }
  return map;
}

std::vector<std::uint8_t> topological_boundary(const TriangleMesh& mesh) {
  std::vector<std::uint8_t> flags(mesh.vertices.size(), 0);
  for (const auto& [edge, count] : edge_multiplicity(mesh)) {
    if (count == 1) {
      flags[edge.first] = 1;
      flags[edge.second] = 1;
    }
  }
  return flags;
}

void TriangleMesh::validate() const {
  const int nv = static_cast<int>(vertices.size());
  if (boundary.size() != vertices.size()) {
    throw ValidationError("mesh: boundary flag count does not match vertex count");
  }
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int v : triangles[t]) {
      if (v < 0 || v >= nv) {
        throw ValidationError("mesh: triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(v) + " out of range");
      }
    }
    if (!(signed_area(t) > 0.0)) {
      throw ValidationError("mesh: triangle " + std::to_string(t) + " is not counterclockwise with positive area");
    }
  }
  for (const auto& [edge, count] : edge_multiplicity(*this)) {
    if (count > 2) {
      throw ValidationError("mesh: edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                            ") shared by more than two triangles");
    }
  }
  if (topological_boundary(*this) != boundary) {
    throw ValidationError("mesh: boundary flags differ from the topological boundary");
  }

  // Duplicate vertices: bucket on a grid of cell size tol and scan neighbour cells.
  const double tol = 1e-12 * std::max(diameter(), 1e-300);
  struct CellHash {
    std::size_t operator()(const std::pair<long long, long long>& c) const noexcept {
      return std::hash<long long>{}(c.first * 73856093LL ^ c.second * 19349663LL);
    }
  };
  std::unordered_map<std::pair<long long, long long>, std::vector<int>, CellHash> cells;
  for (int v = 0; v < nv; ++v) {
    const long long cx = static_cast<long long>(std::floor(vertices[v].x / tol));
    const long long cy = static_cast<long long>(std::floor(vertices[v].y / tol));
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = cells.find({cx + dx, cy + dy});
        if (it == cells.end()) continue;
        for (int w : it->second) {
          if (std::hypot(vertices[v].x - vertices[w].x, vertices[v].y - vertices[w].y) <= tol) {
            throw ValidationError("mesh: duplicate vertices " + std::to_string(w) + " and " + std::to_string(v));
          }
        }
      }
    }
    cells[{cx, cy}].push_back(v);
  }
}

TriangleMesh generate_unit_square(int n) {
  if (n < 1) throw ValidationError("generate_unit_square: n must be >= 1");
  TriangleMesh mesh;
  const int side = n + 1;
  mesh.vertices.reserve(static_cast<std::size_t>(side) * side);
  mesh.boundary.reserve(static_cast<std::size_t>(side) * side);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
      mesh.boundary.push_back(i == 0 || j == 0 || i == n || j == n ? 1 : 0);
    }
  }
  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = j * side + i;
      const int lr = ll + 1;
      const int ul = ll + side;
      const int ur = ul + 1;
      mesh.triangles.push_back({ll, lr, ur});
      mesh.triangles.push_back({ll, ur, ul});
    }
  }
  mesh.level = 1;
  return mesh;
}

TriangleMesh load_mesh(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;

  // Next non-comment, non-blank line; false at end of input.
  auto next_line = [&](std::istringstream& fields) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      fields = std::istringstream(line);
      return true;
    }
    return false;
  };
  auto expect_end = [&](std::istringstream& fields) {
    std::string extra;
    if (fields >> extra) throw ParseError("unexpected trailing token '" + extra + "'", line_no);
  };

  std::istringstream fields;
  if (!next_line(fields)) throw ParseError("missing header 'nv nt'", line_no);
  long long nv = -1, nt = -1;
  if (!(fields >> nv >> nt) || nv < 0 || nt < 0) throw ParseError("header must be 'nv nt' with nv, nt >= 0", line_no);
  expect_end(fields);

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  mesh.boundary.reserve(static_cast<std::size_t>(nv));
  for (long long v = 0; v < nv; ++v) {
    if (!next_line(fields)) throw ParseError("expected " + std::to_string(nv) + " vertex lines", line_no);
    double x = 0.0, y = 0.0;
    int b = -1;
    if (!(fields >> x >> y >> b) || (b != 0 && b != 1)) throw ParseError("vertex line must be 'x y b' with b in {0,1}", line_no);
    expect_end(fields);
    if (!std::isfinite(x) || !std::isfinite(y)) throw ParseError("non-finite vertex coordinate", line_no);
    mesh.vertices.push_back({x, y});
    mesh.boundary.push_back(static_cast<std::uint8_t>(b));
  }
  mesh.triangles.reserve(static_cast<std::size_t>(nt));
  for (long long t = 0; t < nt; ++t) {
    if (!next_line(fields)) throw ParseError("expected " + std::to_string(nt) + " triangle lines", line_no);
    long long i = 0, j = 0, k = 0;
    if (!(fields >> i >> j >> k)) throw ParseError("triangle line must be 'i j k'", line_no);
    expect_end(fields);
    for (long long idx : {i, j, k}) {
      if (idx < 0 || idx >= nv) {
        throw ParseError("vertex index " + std::to_string(idx) + " out of range [0," + std::to_string(nv) + ")", line_no);
      }
    }
    Triangle tri{static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)};
    const double area = cross(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    if (area < 0.0) std::swap(tri[1], tri[2]);
    mesh.triangles.push_back(tri);
  }
  if (next_line(fields)) throw ParseError("unexpected content after the last triangle", line_no);
  mesh.level = 1;
  mesh.validate();
  return mesh;
}

TriangleMesh load_mesh_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open mesh file '" + path + "'", 0);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return load_mesh(buffer.str());
}

Refinement refine_regular(const TriangleMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  const auto multiplicity = edge_multiplicity(mesh);

  // std::map iterates in sorted endpoint order, which fixes the midpoint numbering.
  std::map<Edge, int> midpoint;
  Refinement out;
  TriangleMesh& fine = out.fine;
  fine.vertices = mesh.vertices;
  fine.boundary = mesh.boundary;
  fine.vertices.reserve(mesh.vertices.size() + multiplicity.size());
  fine.boundary.reserve(mesh.vertices.size() + multiplicity.size());
  int next = nv;
  for (const auto& [edge, count] : multiplicity) {
    const Point& a = mesh.vertices[edge.first];
    const Point& b = mesh.vertices[edge.second];
    fine.vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    fine.boundary.push_back(count == 1 ? 1 : 0);
    midpoint.emplace(edge, next++);
  }

  fine.triangles.reserve(mesh.triangles.size() * kChildrenPerTriangle);
  out.parent.reserve(mesh.triangles.size() * kChildrenPerTriangle);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto [a, b, c] = mesh.triangles[t];
    const int mab = midpoint.at(make_edge(a, b));
    const int mbc = midpoint.at(make_edge(b, c));
    const int mca = midpoint.at(make_edge(c, a));
    fine.triangles.push_back({a, mab, mca});
    fine.triangles.push_back({mab, b, mbc});
    fine.triangles.push_back({mca, mbc, c});
    fine.triangles.push_back({mab, mbc, mca});
    for (int q = 0; q < kChildrenPerTriangle; ++q) out.parent.push_back(static_cast<int>(t));
  }
  fine.level = mesh.level + 1;
  return out;
}

SparseMatrix prolongation_matrix(const TriangleMesh& coarse, const TriangleMesh& fine,
                                 const std::vector<int>& parent) {
  const std::size_t nvc = coarse.vertices.size();
  if (fine.vertices.size() < nvc || parent.size() != fine.triangles.size()) {
    throw ValidationError("prolongation_matrix: fine mesh is not a refinement of the coarse mesh");
  }
  for (std::size_t v = 0; v < nvc; ++v) {
    if (!(fine.vertices[v] == coarse.vertices[v])) {
      throw ValidationError("prolongation_matrix: fine vertex " + std::to_string(v) +
                            " does not match the coarse vertex coordinates");
    }
  }
  const double tol = 1e-12 * std::max(coarse.diameter(), 1e-300);

  // Endpoints of the coarse edge each new fine vertex bisects.
  std::vector<Edge> source(fine.vertices.size(), Edge{-1, -1});
  for (std::size_t tf = 0; tf < fine.triangles.size(); ++tf) {
    const int tc = parent[tf];
    if (tc < 0 || static_cast<std::size_t>(tc) >= coarse.triangles.size()) {
      throw ValidationError("prolongation_matrix: parent index out of range");
    }
    const auto& ct = coarse.triangles[tc];
    for (int v : fine.triangles[tf]) {
      if (static_cast<std::size_t>(v) < nvc || source[v].first >= 0) continue;
      const Point& p = fine.vertices[v];
      for (int e = 0; e < 3; ++e) {
        const Point& a = coarse.vertices[ct[e]];
        const Point& b = coarse.vertices[ct[(e + 1) % 3]];
        if (std::hypot(p.x - 0.5 * (a.x + b.x), p.y - 0.5 * (a.y + b.y)) <= tol) {
          source[v] = make_edge(ct[e], ct[(e + 1) % 3]);
          break;
        }
      }
      if (source[v].first < 0) {
        throw ValidationError("prolongation_matrix: fine vertex " + std::to_string(v) +
                              " is not an edge midpoint of its parent triangle");
      }
    }
  }

  const auto coarse_free = coarse.free_dof_map();
  const auto fine_free = fine.free_dof_map();
  std::vector<Triplet> entries;
  entries.reserve(2 * fine.vertices.size());
  for (std::size_t v = 0; v < fine.vertices.size(); ++v) {
    const int row = fine_free[v];
    if (row < 0) continue;
    if (v < nvc) {
      if (coarse_free[v] < 0) {
        throw ValidationError("prolongation_matrix: coarse boundary vertex became interior");
      }
      entries.push_back({row, coarse_free[v], 1.0});
      continue;
    }
    if (source[v].first < 0) throw ValidationError("prolongation_matrix: orphan fine vertex " + std::to_string(v));
    for (int end : {source[v].first, source[v].second}) {
      if (coarse_free[end] >= 0) entries.push_back({row, coarse_free[end], 0.5});
    }
  }
  return SparseMatrix::from_triplets(static_cast<int>(fine.num_free()), static_cast<int>(coarse.num_free()), entries);
}

MeshHierarchy build_hierarchy(const TriangleMesh& coarse, int n_levels, std::size_t vertex_budget) {
  if (n_levels < 1) throw ValidationError("build_hierarchy: n_levels must be >= 1");

  // Predict the finest vertex count: V' = V + E, E' = 2E + 3T, T' = 4T.
  long double v = static_cast<long double>(coarse.vertices.size());
  long double e = static_cast<long double>(edge_multiplicity(coarse).size());
  long double t = static_cast<long double>(coarse.triangles.size());
  for (int k = 1; k < n_levels; ++k) {
    v += e;
    e = 2 * e + 3 * t;
    t *= kChildrenPerTriangle;
  }
  if (v > static_cast<long double>(vertex_budget)) {
    throw ResourceError("build_hierarchy: finest level would have " + std::to_string(static_cast<long long>(v)) +
                        " vertices, budget is " + std::to_string(vertex_budget));
  }

  MeshHierarchy h;
  h.levels.reserve(static_cast<std::size_t>(n_levels));
  h.levels.push_back(coarse);
  for (int k = 1; k < n_levels; ++k) {
    Refinement r = refine_regular(h.levels.back());
    h.prolongations.push_back(prolongation_matrix(h.levels.back(), r.fine, r.parent));
    h.parent_maps.push_back(std::move(r.parent));
    h.levels.push_back(std::move(r.fine));
  }
  return h;
}

}  // namespace eigmg
