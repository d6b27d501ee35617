#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "eigmg/error.hpp"
#include "eigmg/mesh.hpp"
#include "support/generators.hpp"

using namespace eigmg;

namespace {

int count_boundary(const TriangleMesh& m) { return static_cast<int>(std::count(m.boundary.begin(), m.boundary.end(), 1)); }

std::set<std::set<int>> triangle_sets(const TriangleMesh& m) {
  std::set<std::set<int>> out;
  for (const auto& t : m.triangles) out.insert({t[0], t[1], t[2]});
  return out;
}

const char* kSquareFile = R"(# unit square, two triangles
4 2
0 0 1
1 0 1
0 1 1
1 1 1
0 1 3
0 3 2
)";

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("structured generator counts") {
    const TriangleMesh m1 = generate_unit_square(1);
    CHECK(m1.num_vertices() == 4);
    CHECK(m1.num_triangles() == 2);
    CHECK(count_boundary(m1) == 4);

    const TriangleMesh m2 = generate_unit_square(2);
    CHECK(m2.num_vertices() == 9);
    CHECK(m2.num_triangles() == 8);
    CHECK(count_boundary(m2) == 8);
    CHECK(m2.num_free() == 1);

    const TriangleMesh m8 = generate_unit_square(8);
    CHECK(m8.num_vertices() == 81);
    CHECK(m8.num_triangles() == 128);
    CHECK(m8.num_free() == 49);
    CHECK(m8.total_area() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(generate_unit_square(0), ValidationError);
  }

  TEST_CASE("load_mesh round trip of the unit square") {
    const TriangleMesh loaded = load_mesh(kSquareFile);
    const TriangleMesh ref = generate_unit_square(1);
    CHECK(loaded.vertices == ref.vertices);
    CHECK(loaded.boundary == ref.boundary);
    CHECK(triangle_sets(loaded) == triangle_sets(ref));
  }

  TEST_CASE("load_mesh reorients clockwise triangles") {
    const TriangleMesh m = load_mesh("4 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 2 1\n0 2 3\n");
    CHECK(m.triangles[0] == Triangle{0, 1, 2});
    CHECK(m.triangles[1] == Triangle{0, 2, 3});
    for (std::size_t t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
  }

  TEST_CASE("load_mesh errors") {
    SUBCASE("index out of range") { CHECK_THROWS_AS(load_mesh("3 1\n0 0 1\n1 0 1\n0 1 1\n0 1 3\n"), Error); }
    SUBCASE("parse error carries the line number") {
      try {
        load_mesh("# header comment\n3 1\n0 0 1\n1 zero 1\n0 1 1\n0 1 2\n");
        FAIL("expected a parse error");
      } catch (const ParseError& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
      }
    }
    SUBCASE("truncated file") { CHECK_THROWS_AS(load_mesh("3 1\n0 0 1\n1 0 1\n"), ParseError); }
    SUBCASE("trailing tokens") { CHECK_THROWS_AS(load_mesh("3 1\n0 0 1 7\n1 0 1\n0 1 1\n0 1 2\n"), ParseError); }
    SUBCASE("wrong boundary flag") { CHECK_THROWS_AS(load_mesh("3 1\n0 0 1\n1 0 1\n0 1 0\n0 1 2\n"), ValidationError); }
    SUBCASE("degenerate triangle") { CHECK_THROWS_AS(load_mesh("3 1\n0 0 1\n1 0 1\n2 0 1\n0 1 2\n"), ValidationError); }
    SUBCASE("duplicate vertex") {
      CHECK_THROWS_AS(load_mesh("5 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n1 1 1\n0 1 2\n0 4 3\n"), ValidationError);
    }
  }

  TEST_CASE("regular refinement") {
    const TriangleMesh coarse = generate_unit_square(1);
    const Refinement r = refine_regular(coarse);
    CHECK(r.fine.num_triangles() == 8);
    CHECK(r.fine.num_vertices() == 9);
    CHECK(r.fine.level == 2);
    CHECK(r.fine.max_edge_length() == doctest::Approx(0.5 * coarse.max_edge_length()).epsilon(1e-14));
    CHECK(r.parent.size() == 8);
    for (std::size_t t = 0; t < r.parent.size(); ++t) CHECK(r.parent[t] == static_cast<int>(t / 4));
    CHECK_NOTHROW(r.fine.validate());

    const TriangleMesh twice = refine_regular(refine_regular(generate_unit_square(2)).fine).fine;
    CHECK(twice.num_triangles() == 128);
    CHECK(twice.num_triangles() == generate_unit_square(8).num_triangles());
  }

  TEST_CASE("refinement appends sorted edge midpoints") {
    const TriangleMesh coarse = generate_unit_square(1);
    const TriangleMesh fine = refine_regular(coarse).fine;
    // Edges by sorted endpoint pair: (0,1) (0,2) (0,3) (1,3) (2,3).
    const std::vector<Point> expected{{0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}, {1.0, 0.5}, {0.5, 1.0}};
    for (std::size_t e = 0; e < expected.size(); ++e) CHECK(fine.vertices[4 + e] == expected[e]);
    CHECK(fine.boundary[6] == 0);
    CHECK(count_boundary(fine) == 8);
  }

  TEST_CASE("hierarchy sizes") {
    const MeshHierarchy one = build_hierarchy(generate_unit_square(1), 1);
    CHECK(one.size() == 1);
    CHECK(one.prolongations.empty());

    const MeshHierarchy three = build_hierarchy(generate_unit_square(1), 3);
    CHECK(three.levels[0].num_triangles() == 2);
    CHECK(three.levels[1].num_triangles() == 8);
    CHECK(three.levels[2].num_triangles() == 32);

    const MeshHierarchy h = build_hierarchy(generate_unit_square(8), 4);
    const std::vector<std::size_t> expected{49, 225, 961, 3969};
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(h.levels[k].num_free() == expected[k]);
      CHECK(h.levels[k].level == static_cast<int>(k) + 1);
      // N_k ~ 4^(k-n) N_n up to boundary rounding.
      const double predicted = h.finest().num_free() / std::pow(4.0, 3.0 - static_cast<double>(k));
      CHECK(std::abs(static_cast<double>(expected[k]) - predicted) <= 0.5 * std::sqrt(predicted) * 4.0);
    }
    CHECK_THROWS_AS(build_hierarchy(generate_unit_square(8), 0), ValidationError);
    CHECK_THROWS_AS(build_hierarchy(generate_unit_square(8), 8, 100'000), ResourceError);
  }

  TEST_CASE("prolongation rows") {
    const MeshHierarchy h = build_hierarchy(generate_unit_square(4), 2);
    const TriangleMesh& coarse = h.levels[0];
    const TriangleMesh& fine = h.levels[1];
    const SparseMatrix& p = h.prolongations[0];
    const std::vector<int> cmap = coarse.free_dof_map();
    const std::vector<int> fmap = fine.free_dof_map();
    CHECK(p.rows() == static_cast<int>(fine.num_free()));
    CHECK(p.cols() == static_cast<int>(coarse.num_free()));
    const auto offsets = p.row_offsets();
    const auto vals = p.values();
    const auto cols = p.col_indices();
    int unit_rows = 0, half_pairs = 0, single_halves = 0, empty_rows = 0;
    for (std::size_t v = 0; v < fine.num_vertices(); ++v) {
      const int r = fmap[v];
      if (r < 0) continue;
      const int len = offsets[r + 1] - offsets[r];
      if (v < coarse.num_vertices()) {
        REQUIRE(len == 1);
        CHECK(vals[offsets[r]] == 1.0);
        CHECK(cols[offsets[r]] == cmap[v]);
        ++unit_rows;
      } else if (len == 2) {
        CHECK(vals[offsets[r]] == 0.5);
        CHECK(vals[offsets[r] + 1] == 0.5);
        ++half_pairs;
      } else if (len == 1) {
        CHECK(vals[offsets[r]] == 0.5);
        ++single_halves;
      } else {
        // Interior midpoint of an edge joining two boundary vertices.
        CHECK(len == 0);
        ++empty_rows;
      }
    }
    CHECK(unit_rows == static_cast<int>(coarse.num_free()));
    CHECK(half_pairs > 0);
    CHECK(single_halves > 0);
    CHECK(empty_rows == 2);
  }

  TEST_CASE("prolongation rejects a mesh that is not the refinement") {
    const TriangleMesh coarse = generate_unit_square(2);
    const Refinement r = refine_regular(coarse);
    TriangleMesh moved = r.fine;
    moved.vertices[0].x += 1e-3;
    CHECK_THROWS_AS(prolongation_matrix(coarse, moved, r.parent), ValidationError);
  }
}

TEST_SUITE("mesh-properties") {
  TEST_CASE("refinement preserves area and nests vertices on jittered meshes") {
    gen::Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
      const TriangleMesh coarse = gen::jittered_square(rng.integer(2, 9), 0.3, rng);
      const MeshHierarchy h = build_hierarchy(coarse, 3);
      for (std::size_t k = 0; k + 1 < h.size(); ++k) {
        const TriangleMesh& c = h.levels[k];
        const TriangleMesh& f = h.levels[k + 1];
        CHECK(f.num_triangles() == 4 * c.num_triangles());
        CHECK(std::equal(c.vertices.begin(), c.vertices.end(), f.vertices.begin()));
        for (std::size_t t = 0; t < c.num_triangles(); ++t) {
          double child_area = 0.0;
          for (int q = 0; q < 4; ++q) child_area += f.signed_area(4 * t + static_cast<std::size_t>(q));
          CHECK(std::abs(child_area - c.signed_area(t)) <= 1e-12 * c.signed_area(t));
        }
        CHECK(std::abs(f.total_area() - c.total_area()) <= 1e-12 * c.total_area());
        CHECK(f.boundary == topological_boundary(f));
      }
    }
  }

  TEST_CASE("interpolation reproduces linear functions away from the boundary") {
    gen::Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      const TriangleMesh coarse = gen::jittered_square(rng.integer(3, 8), 0.25, rng);
      const Refinement r = refine_regular(coarse);
      const SparseMatrix p = prolongation_matrix(coarse, r.fine, r.parent);
      const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
      auto f = [&](const Point& q) { return a + b * q.x + c * q.y; };
      const std::vector<int> cmap = coarse.free_dof_map();
      const std::vector<int> fmap = r.fine.free_dof_map();
      Vector coarse_values(coarse.num_free());
      for (std::size_t v = 0; v < coarse.num_vertices(); ++v) {
        if (cmap[v] >= 0) coarse_values[static_cast<std::size_t>(cmap[v])] = f(coarse.vertices[v]);
      }
      const Vector fine_values = p * coarse_values;
      const auto offsets = p.row_offsets();
      const auto vals = p.values();
      for (std::size_t v = 0; v < r.fine.num_vertices(); ++v) {
        const int row = fmap[v];
        if (row < 0) continue;
        double row_sum = 0.0;
        for (int k = offsets[row]; k < offsets[row + 1]; ++k) row_sum += vals[k];
        // Rows whose stencil is entirely interior: unit rows and two-entry midpoint rows.
        const bool interior_stencil = v < coarse.num_vertices() || offsets[row + 1] - offsets[row] == 2;
        if (!interior_stencil) continue;
        CHECK(row_sum == 1.0);
        CHECK(fine_values[static_cast<std::size_t>(row)] == doctest::Approx(f(r.fine.vertices[v])).epsilon(1e-13));
      }
    }
  }
}
