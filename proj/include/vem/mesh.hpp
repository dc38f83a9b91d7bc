// Polygonal meshes of the unit square: storage, topology, generation of the
// three study families, regularity reporting and text serialization.
//
// An edge is stored once, as the vertex pair (v_lo, v_hi) with v_lo < v_hi,
// and carries a fixed global orientation independent of the incident cells:
// its tangent points from v_lo to v_hi and its normal is the tangent rotated
// by +90 degrees. A cell sees the edge with incidence sign +1 when that
// global normal points out of the cell (i.e. the cell traverses the edge from
// v_hi to v_lo), and -1 otherwise.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vem/geometry.hpp"

namespace vem {

enum class MeshFamily { M1, M2, M3 };

/// Parse "m1" / "m2" / "m3" (case-insensitive). Throws Error otherwise.
MeshFamily parse_family(const std::string& name);
std::string family_name(MeshFamily family);

struct PolyMesh {
  std::vector<VectorRd> vertices;
  /// Counterclockwise vertex cycles, one per cell.
  std::vector<std::vector<int>> cells;
  /// Global edges (v_lo, v_hi) with v_lo < v_hi.
  std::vector<std::array<int, 2>> edges;
  /// cell_edges[c][i] is the edge between cells[c][i] and cells[c][i+1].
  std::vector<std::vector<int>> cell_edges;
  /// +1 when the global edge normal points out of the cell, -1 otherwise.
  std::vector<std::vector<int>> cell_edge_signs;
  std::vector<bool> vertex_on_boundary;
  std::vector<bool> edge_on_boundary;

  // Per-cell geometry, precomputed at construction.
  std::vector<double> cell_areas;
  std::vector<double> cell_diameters;
  std::vector<VectorRd> cell_centroids;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }

  Polygon cell_polygon(int c) const;

  double edge_length(int e) const {
    return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
  }
  /// Unit tangent from v_lo to v_hi.
  VectorRd edge_tangent(int e) const {
    return (vertices[edges[e][1]] - vertices[edges[e][0]]).normalized();
  }
  /// Fixed global normal: tangent rotated by +90 degrees.
  VectorRd edge_normal(int e) const { return rot90ccw(edge_tangent(e)); }
};

/// Assemble a mesh from vertices and cell cycles: derives the edge table,
/// incidence signs, boundary flags and per-cell geometry. Throws MeshError on
/// invalid cells or non-conforming (non-manifold) connectivity.
PolyMesh build_mesh(std::vector<VectorRd> vertices, std::vector<std::vector<int>> cells);

/// Verify the mesh invariants: valid counterclockwise cells, 1-2 cells per
/// edge with opposite signs on interior edges, and cell areas summing to the
/// unit-square area within 1e-12. Throws MeshError on violation.
void check_mesh(const PolyMesh& mesh);

/// Largest cell diameter.
double mesh_diameter(const PolyMesh& mesh);

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Generate one of the three mesh families on [0,1]^2:
///   M1 - n x n quadrilateral grid, n = 4*2^(level-1), interior vertices
///        perturbed uniformly within [-1/4, 1/4]^2 of the cell size;
///   M2 - Lloyd-relaxed Voronoi tessellation of n^2 seeds, n = 5*2^(level-1);
///   M3 - n x n tiling of congruent non-convex octagons, n = 4*2^(level-1).
/// Deterministic in (family, level, seed). Levels 1 to 5. The result always
/// satisfies check_mesh plus star-shapedness of every cell; generation fails
/// with MeshError instead of returning a defective mesh.
PolyMesh generate_mesh(MeshFamily family, int level, std::uint64_t seed);

/// M1 generator with an explicit perturbation fraction (of the cell size);
/// fraction 0 gives the uniform grid. generate_mesh uses fraction 1/4.
PolyMesh generate_m1(int level, std::uint64_t seed, double perturbation);

// ---------------------------------------------------------------------------
// Regularity
// ---------------------------------------------------------------------------

struct ElementRegularity {
  double h_P = 0.0;
  double min_edge_ratio = 0.0; ///< min over edges of h_E / h_P, in (0,1]
  bool convex = false;
  bool star_shaped = false;
  double rho = 0.0; ///< largest r with a disk of radius r*h_P inside the kernel
};

struct RegularityReport {
  std::vector<ElementRegularity> elements;
  double h = 0.0;               ///< max over elements of h_P
  double min_edge_ratio = 1.0;  ///< min over elements
};

/// Per-element shape metrics. Degenerate cells are reported through the
/// flags, never by throwing.
RegularityReport regularity_report(const PolyMesh& mesh);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------
// Text format (whitespace-delimited):
//   vem-poly-mesh 1
//   <n_vertices> <n_cells>
//   x y                 (n_vertices lines, full double precision)
//   m i0 i1 ... i(m-1)  (n_cells lines, 0-based counterclockwise cycles)
// The edge table is derived on read, never stored.

void write_mesh(const PolyMesh& mesh, std::ostream& out);
PolyMesh read_mesh(std::istream& in);

void write_mesh_file(const PolyMesh& mesh, const std::string& path);
PolyMesh read_mesh_file(const std::string& path);

} // namespace vem
