// Velocity/pressure spaces on a polygon: degree-of-freedom layouts for the
// two conforming formulations, the per-element projector matrices, DOF
// interpolation of smooth fields and a unisolvence diagnostic.
//
// Formulation F1 splits the velocity into two scalar components; each carries
// vertex values, per-edge moments against P_{k-1}(E) and cell moments against
// P_{k-2}(P). Formulation F2 is vector-valued: vertex values, per-edge
// moments of v.n against P_{k-1}(E) and of v.t against P_{k-2}(E), and cell
// moments against [P_{k-2}(P)]^2.
//
// Conventions, fixed once and for all:
//  * every edge DOF lives in the global edge frame: the arc coordinate sigma
//    runs from -1/2 at the lower-index vertex to +1/2 at the higher-index
//    one, and F2 uses the global normal/tangent of the edge. Local element
//    DOFs are therefore identical to the global ones; element orientation
//    enters only through the outward-normal signs inside the operators;
//  * polynomial coefficients are expressed in the orthonormalized element
//    basis (ElementBasis::L applied to the scaled monomials), which turns
//    L2 projections into plain moment vectors;
//  * pressure DOFs are the scaled-monomial coefficients of the element-wise
//    P_{k-1} pressure, never shared between elements.

#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vem/basis.hpp"
#include "vem/mesh.hpp"

namespace vem {

enum class Formulation { F1, F2 };

Formulation parse_formulation(const std::string& name);
std::string formulation_name(Formulation formulation);

struct SchemeConfig {
  Formulation formulation = Formulation::F1;
  int degree = 1; ///< k >= 1
  bool enhanced = true;

  /// Degree used to project the load: k for the enhanced variant,
  /// max(0, k-2) for the regular one.
  int rhs_degree() const { return enhanced ? degree : std::max(0, degree - 2); }
  void validate() const;
};

/// dim P_{k-1} = k(k+1)/2 pressure DOFs per element.
int pressure_dofs_per_cell(const SchemeConfig& config);

/// Local velocity DOF count of an element with n_edges edges.
int velocity_dofs_in_cell(const SchemeConfig& config, int n_edges);

// ---------------------------------------------------------------------------
// Local DOF layout
// ---------------------------------------------------------------------------

/// Index arithmetic for the local velocity DOFs of one element. Both the
/// element operators and the global DOF map derive their ordering from here.
///
/// F1 (component-blocked): per component c in {x, y}:
///   [vertex values (cycle order) | k moments per edge (cycle order) |
///    cell moments (monomial order)]
/// F2: [vertex values, x/y interleaved | k normal moments per edge |
///      k-1 tangential moments per edge | cell moments, x block then y block]
class VelocityLayout {
public:
  VelocityLayout(const SchemeConfig& config, int n_edges);

  int size() const { return m_size; }
  int n_edges() const { return m_ne; }

  /// DOF of component `comp` at cycle vertex `v`.
  int vertex(int v, int comp) const;
  /// F1 only: j-th moment of component `comp` on cycle edge `e`, j < k.
  int edge_f1(int e, int comp, int j) const;
  /// F2 only: j-th moment of v.n on edge `e`, j < k.
  int edge_normal(int e, int j) const;
  /// F2 only: j-th moment of v.t on edge `e`, j < k-1.
  int edge_tangent(int e, int j) const;
  /// Cell moment of component `comp` against scaled monomial `beta`.
  int cell_moment(int comp, int beta) const;

  Formulation formulation() const { return m_form; }

private:
  Formulation m_form;
  int m_k, m_ne, m_nkm2, m_size;
};

// ---------------------------------------------------------------------------
// Element operators
// ---------------------------------------------------------------------------

/// All projector matrices of one element. Row indices refer to the
/// orthonormalized basis of ElementBasis (degree k+1), columns to the local
/// velocity DOFs in VelocityLayout order.
struct ElementOperators {
  ElementOperators(const SchemeConfig& config_in, Polygon polygon_in, ElementBasis basis_in,
                   const VelocityLayout& layout_in)
      : config(config_in), polygon(std::move(polygon_in)), basis(std::move(basis_in)),
        layout(layout_in) {}

  SchemeConfig config;
  Polygon polygon;
  ElementBasis basis; ///< degree k+1
  VelocityLayout layout;

  struct EdgeFrame {
    VectorRd lo, hi;  ///< endpoints at sigma = -1/2 and +1/2 (global order)
    VectorRd tangent; ///< unit, lo -> hi
    VectorRd normal;  ///< tangent rotated by +90 degrees
    double length = 0.0;
    int sign = 0; ///< +1 when `normal` points out of this element
  };
  std::vector<EdgeFrame> edges;

  int n_dofs = 0;
  int Nkm2 = 0, Nkm1 = 0, Nk = 0, Nkp1 = 0; ///< poly_dim(k-2) ... poly_dim(k+1)

  /// trace[c][e]: (k+2) x n_dofs map from DOFs to the sigma-monomial
  /// coefficients of component c of the trace on edge e.
  std::array<std::vector<Eigen::MatrixXd>, 2> trace;

  /// Elliptic projector, per component: N_k x n_dofs.
  std::array<Eigen::MatrixXd, 2> Pnabla;

  /// moments[c](i, :) maps DOFs to int_P v_c o_i for i < N_k. Rows below
  /// dim P_{k-2} come from the cell moment DOFs and are exact; higher rows
  /// substitute the moments of Pnabla v (exact for the enhanced space).
  std::array<Eigen::MatrixXd, 2> moments;

  /// L2 projections of the velocity gradient, Pgrad[c][d]: N_{k-1} x n_dofs
  /// for d(v_c)/d(x_d).
  std::array<std::array<Eigen::MatrixXd, 2>, 2> Pgrad;

  /// L2 projections of the divergence at degrees k-1, k, k+1. The degree-k-1
  /// map is exact on the virtual space; the higher two rely on the moment
  /// substitution.
  Eigen::MatrixXd Pdiv_km1, Pdiv_k, Pdiv_kp1;

  /// DOFs of the orthonormal polynomial velocity fields (o_i, 0), (0, o_i),
  /// i < N_k: n_dofs x 2 N_k. Column ordering matches pnabla_stacked().
  Eigen::MatrixXd D;

  /// Function projection at degree ell <= k for component c,
  /// as orthonormal-basis coefficients.
  Eigen::MatrixXd p0(int ell, int comp) const {
    return moments[comp].topRows(poly_dim(ell));
  }

  /// [Pnabla x; Pnabla y]: 2 N_k x n_dofs.
  Eigen::MatrixXd pnabla_stacked() const;
};

/// Build every projector of one element. `edge_reversed[i]` says that cycle
/// edge i (from vertex i to i+1) runs against the global lo -> hi direction;
/// an empty vector means no edge is reversed (standalone element). Throws
/// GeometryError for degenerate polygons and ConditioningError when the
/// elliptic projector system is numerically singular.
ElementOperators build_element_operators(const SchemeConfig& config, const Polygon& polygon,
                                         const std::vector<bool>& edge_reversed = {});

// ---------------------------------------------------------------------------
// Global DOF map
// ---------------------------------------------------------------------------

struct DofMap {
  SchemeConfig config;
  int n_velocity = 0;
  int n_pressure = 0;
  int pressure_per_cell = 0;
  /// cell_velocity[c][l]: global id of local velocity DOF l (VelocityLayout
  /// order for the cell's edge count).
  std::vector<std::vector<int>> cell_velocity;
  /// First global pressure DOF of each cell; the cell owns pressure_per_cell
  /// consecutive ids.
  std::vector<int> cell_pressure_offset;
  /// Dirichlet flags: vertex and edge velocity DOFs on the domain boundary.
  std::vector<bool> velocity_on_boundary;
};

DofMap build_dof_map(const PolyMesh& mesh, const SchemeConfig& config);

/// Per-cell edge_reversed flags for build_element_operators.
std::vector<bool> cell_edge_reversed(const PolyMesh& mesh, int cell);

// ---------------------------------------------------------------------------
// Interpolation and diagnostics
// ---------------------------------------------------------------------------

using VectorField = std::function<VectorRd(const VectorRd&)>;

/// Global velocity DOF vector of the interpolant of a smooth field: vertex
/// values pointwise, edge and cell moments by high-order quadrature.
Eigen::VectorXd interpolate(const VectorField& u, const PolyMesh& mesh,
                            const SchemeConfig& config, const DofMap& dofs);

/// Conditioning proxy for DOF unisolvence: the stacked map from local DOFs to
/// every edge-trace coefficient plus the interior moments. All entries are
/// scale-invariant (they depend on edge directions only), so congruent
/// elements of different size report identical values.
struct UnisolvenceReport {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int rows = 0;
  int cols = 0;
};

UnisolvenceReport unisolvence_check(const SchemeConfig& config, const Polygon& polygon);

} // namespace vem
