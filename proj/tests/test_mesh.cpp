// Mesh module tests: family generators (element counts, determinism,
// invariants, regularity floors), topology conventions, and serialization
// round-trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <sstream>

#include "vem/mesh.hpp"

using namespace vem;

namespace {

PolyMesh unit_square_mesh() {
  return build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
}

} // namespace

TEST_CASE("family parsing") {
  CHECK(parse_family("m1") == MeshFamily::M1);
  CHECK(parse_family("M2") == MeshFamily::M2);
  CHECK(parse_family("m3") == MeshFamily::M3);
  CHECK(family_name(MeshFamily::M2) == "m2");
  CHECK_THROWS_AS(parse_family("m4"), Error);
  CHECK_THROWS_AS(generate_mesh(MeshFamily::M1, 0, 1), Error);
  CHECK_THROWS_AS(generate_mesh(MeshFamily::M1, 6, 1), Error);
}

TEST_CASE("edge orientation conventions on a one-cell mesh") {
  PolyMesh mesh = unit_square_mesh();
  REQUIRE(mesh.n_cells() == 1);
  REQUIRE(mesh.n_edges() == 4);
  REQUIRE(mesh.cell_edges[0].size() == 4);

  // Bottom edge (0,1): tangent lo->hi = +x, global normal = +y (into the
  // cell). The cell traverses 0->1, so its incidence sign must be -1.
  const int e_bottom = mesh.cell_edges[0][0];
  CHECK(mesh.edges[e_bottom][0] == 0);
  CHECK(mesh.edges[e_bottom][1] == 1);
  CHECK(mesh.edge_tangent(e_bottom).isApprox(VectorRd(1, 0)));
  CHECK(mesh.edge_normal(e_bottom).isApprox(VectorRd(0, 1)));
  CHECK(mesh.cell_edge_signs[0][0] == -1);

  // Left edge (0,3): global normal = (-1,0), already outward; the cell
  // traverses 3->0 (hi->lo), so the sign is +1.
  const int e_left = mesh.cell_edges[0][3];
  CHECK(mesh.edges[e_left][0] == 0);
  CHECK(mesh.edges[e_left][1] == 3);
  CHECK(mesh.edge_normal(e_left).isApprox(VectorRd(-1, 0)));
  CHECK(mesh.cell_edge_signs[0][3] == +1);

  CHECK(mesh.edge_length(e_bottom) == doctest::Approx(1.0));
  CHECK(mesh.cell_areas[0] == doctest::Approx(1.0));
  CHECK(mesh.cell_diameters[0] == doctest::Approx(std::sqrt(2.0)));
  for (int e = 0; e < 4; ++e) CHECK(mesh.edge_on_boundary[e]);
  CHECK_NOTHROW(check_mesh(mesh));
}

TEST_CASE("build_mesh rejects broken input") {
  // vertex index out of range
  CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {1, 1}}, {{0, 1, 5}}), MeshError);
  // clockwise cell
  CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 3, 2, 1}}),
                  MeshError);
  // two cells traversing an edge in the same direction (overlap)
  CHECK_THROWS_AS(
      build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}, {0, 1, 2}}),
      MeshError);
}

TEST_CASE("mesh_diameter basics") {
  PolyMesh tri = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  CHECK(mesh_diameter(tri) == doctest::Approx(std::sqrt(2.0)));

  PolyMesh grid = generate_m1(1, 0, 0.0);
  CHECK(mesh_diameter(grid) == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
}

TEST_CASE("element and vertex counts per family") {
  // quadrilateral family: n = 4, 8 -> (n+1)^2 vertices
  PolyMesh m1a = generate_mesh(MeshFamily::M1, 1, 42);
  CHECK(m1a.n_cells() == 16);
  CHECK(m1a.n_vertices() == 25);
  PolyMesh m1b = generate_mesh(MeshFamily::M1, 2, 42);
  CHECK(m1b.n_cells() == 64);
  CHECK(m1b.n_vertices() == 81);

  // Voronoi family: one cell per seed, 4x growth per level
  PolyMesh m2a = generate_mesh(MeshFamily::M2, 1, 42);
  CHECK(m2a.n_cells() == 25);
  PolyMesh m2b = generate_mesh(MeshFamily::M2, 2, 42);
  CHECK(m2b.n_cells() == 100);

  // octagon family
  PolyMesh m3a = generate_mesh(MeshFamily::M3, 1, 42);
  CHECK(m3a.n_cells() == 16);
  CHECK(m3a.n_vertices() == 25 + 2 * 20);
  PolyMesh m3b = generate_mesh(MeshFamily::M3, 2, 42);
  CHECK(m3b.n_cells() == 64);
}

TEST_CASE("generated meshes satisfy the invariants") {
  for (MeshFamily family : {MeshFamily::M1, MeshFamily::M2, MeshFamily::M3}) {
    for (int level = 1; level <= 3; ++level) {
      CAPTURE(family_name(family));
      CAPTURE(level);
      PolyMesh mesh = generate_mesh(family, level, 42);
      CHECK_NOTHROW(check_mesh(mesh));

      double area = 0.0;
      for (double a : mesh.cell_areas) area += a;
      CHECK(std::abs(area - 1.0) < 1e-12);

      // Euler characteristic of a simply connected subdivision of the square
      CHECK(mesh.n_vertices() - mesh.n_edges() + mesh.n_cells() == 1);

      // interior edge signs cancel, boundary edges are traversed once
      std::vector<int> sign_sum(mesh.n_edges(), 0), count(mesh.n_edges(), 0);
      for (int c = 0; c < mesh.n_cells(); ++c) {
        for (size_t i = 0; i < mesh.cell_edges[c].size(); ++i) {
          sign_sum[mesh.cell_edges[c][i]] += mesh.cell_edge_signs[c][i];
          ++count[mesh.cell_edges[c][i]];
        }
      }
      for (int e = 0; e < mesh.n_edges(); ++e) {
        if (mesh.edge_on_boundary[e]) {
          CHECK(count[e] == 1);
        } else {
          CHECK(count[e] == 2);
          CHECK(sign_sum[e] == 0);
        }
      }
    }
  }
}

TEST_CASE("regularity report: floors, convexity, star-shapedness") {
  for (MeshFamily family : {MeshFamily::M1, MeshFamily::M2, MeshFamily::M3}) {
    for (int level = 1; level <= 2; ++level) {
      CAPTURE(family_name(family));
      CAPTURE(level);
      PolyMesh mesh = generate_mesh(family, level, 42);
      RegularityReport report = regularity_report(mesh);
      CHECK(report.h == doctest::Approx(mesh_diameter(mesh)));
      CHECK(report.min_edge_ratio > 0.01);
      for (const auto& el : report.elements) {
        CHECK(el.star_shaped);
        CHECK(el.rho > 0.0);
        CHECK(el.min_edge_ratio > 0.0);
        CHECK(el.min_edge_ratio <= 1.0);
      }
    }
  }

  // the octagon family is non-convex by construction
  RegularityReport m3 = regularity_report(generate_mesh(MeshFamily::M3, 1, 42));
  int n_nonconvex = 0;
  for (const auto& el : m3.elements) n_nonconvex += el.convex ? 0 : 1;
  CHECK(n_nonconvex == 12); // all cells except the bottom row

  // unperturbed quadrilaterals are convex squares
  RegularityReport flat = regularity_report(generate_m1(1, 0, 0.0));
  for (const auto& el : flat.elements) {
    CHECK(el.convex);
    CHECK(el.rho == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-6));
  }

  // L-shaped element: non-convex but star-shaped
  PolyMesh lshape = build_mesh(
      {{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}, {{0, 1, 2, 3, 4, 5}});
  RegularityReport lrep = regularity_report(lshape);
  CHECK_FALSE(lrep.elements[0].convex);
  CHECK(lrep.elements[0].star_shaped);
}

TEST_CASE("quadrilateral mesh diameters track the reference values") {
  // Reference diameters 3.72e-1, 1.99e-1, 1.01e-1 carry seed noise; the
  // perturbation law caps the stretch at 1.5x the unperturbed diagonal.
  const double reference[3] = {3.72e-1, 1.99e-1, 1.01e-1};
  for (std::uint64_t seed : {1ull, 42ull}) {
    for (int level = 1; level <= 3; ++level) {
      const double h = mesh_diameter(generate_mesh(MeshFamily::M1, level, seed));
      CAPTURE(seed);
      CAPTURE(level);
      CHECK(h / reference[level - 1] > 0.85);
      CHECK(h / reference[level - 1] < 1.45);
    }
  }
}

TEST_CASE("determinism and seed sensitivity") {
  for (MeshFamily family : {MeshFamily::M1, MeshFamily::M2}) {
    PolyMesh a = generate_mesh(family, 2, 7);
    PolyMesh b = generate_mesh(family, 2, 7);
    REQUIRE(a.n_vertices() == b.n_vertices());
    for (int v = 0; v < a.n_vertices(); ++v) {
      CHECK(a.vertices[v].x() == b.vertices[v].x());
      CHECK(a.vertices[v].y() == b.vertices[v].y());
    }
    CHECK(a.cells == b.cells);

    PolyMesh c = generate_mesh(family, 2, 8);
    bool identical = a.n_vertices() == c.n_vertices();
    if (identical) {
      identical = false;
      for (int v = 0; v < a.n_vertices() && !identical; ++v)
        identical = a.vertices[v] != c.vertices[v];
      identical = !identical;
    }
    CHECK_FALSE(identical);
  }
}

TEST_CASE("refinement shrinks the mesh diameter") {
  for (MeshFamily family : {MeshFamily::M1, MeshFamily::M2, MeshFamily::M3}) {
    for (std::uint64_t seed : {7ull, 42ull}) {
      double prev = 1e300;
      for (int level = 1; level <= 3; ++level) {
        const double h = mesh_diameter(generate_mesh(family, level, seed));
        CAPTURE(family_name(family));
        CHECK(h < prev);
        prev = h;
      }
    }
  }
}

TEST_CASE("serialization round-trip") {
  PolyMesh mesh = generate_mesh(MeshFamily::M2, 1, 42);

  std::ostringstream out;
  write_mesh(mesh, out);
  std::istringstream in(out.str());
  PolyMesh back = read_mesh(in);

  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_cells() == mesh.n_cells());
  CHECK(back.cells == mesh.cells);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    CHECK(back.vertices[v].x() == mesh.vertices[v].x());
    CHECK(back.vertices[v].y() == mesh.vertices[v].y());
  }

  // writing the parsed mesh again reproduces the bytes
  std::ostringstream out2;
  write_mesh(back, out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("parse errors carry line numbers") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_mesh(in);
      FAIL_CHECK("expected IoError for: " << needle);
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("line") != std::string::npos);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_error("bogus-header 1\n3 1\n", "header");
  // clockwise cell
  expect_error("vem-poly-mesh 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 3 2 1\n",
               "counterclockwise");
  // no cells
  expect_error("vem-poly-mesh 1\n3 0\n0 0\n1 0\n0 1\n", "no cells");
  // index out of range
  expect_error("vem-poly-mesh 1\n3 1\n0 0\n1 0\n0 1\n3 0 1 7\n", "out of range");
  // truncated stream
  expect_error("vem-poly-mesh 1\n4 1\n0 0\n1 0\n", "end of stream");
}
