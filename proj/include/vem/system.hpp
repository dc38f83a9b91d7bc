// Global saddle-point system: assembly of the element blocks, Dirichlet
// elimination, the zero-mean pressure constraint (one Lagrange multiplier),
// the sparse direct solve, and an inf-sup diagnostic.
//
// Velocity DOFs follow DofMap; pressure DOFs are the per-cell coefficients of
// the scaled monomials of degree k-1, so a cell's constant coefficient pairs
// with the mean constraint through the weight |P|.

#pragma once

#include <Eigen/Sparse>

#include <iosfwd>

#include "vem/local_stokes.hpp"

namespace vem {

/// Pre-elimination global blocks.
struct AssembledSystem {
  DofMap dofs;
  Eigen::SparseMatrix<double> A; ///< n_vel x n_vel stiffness
  Eigen::SparseMatrix<double> B; ///< n_pressure x n_vel divergence
  Eigen::VectorXd load;          ///< n_vel
  Eigen::VectorXd mean_row;      ///< n_pressure; |P| on each constant coefficient
  /// Exact integrals int_P m_i for every pressure DOF (pressure mean and
  /// normalization); equals mean_row only up to degree 1.
  Eigen::VectorXd pressure_integrals;
  /// Interpolated boundary data, full velocity length; only entries flagged
  /// in dofs.velocity_on_boundary are used.
  Eigen::VectorXd boundary_values;
};

/// Assemble stiffness, divergence, load and boundary data. The boundary
/// field must be evaluable on the closed domain (interpolation runs through
/// the element pipeline); pass the exact velocity for manufactured problems.
AssembledSystem assemble_system(const PolyMesh& mesh, const SchemeConfig& config,
                                const VectorField& load, const VectorField& boundary);

struct StokesSolution {
  Eigen::VectorXd velocity; ///< n_vel, boundary DOFs filled with the data
  Eigen::VectorXd pressure; ///< n_pressure monomial coefficients, zero mean
  double multiplier = 0.0;  ///< ~0 for compatible data
  double residual = 0.0;    ///< relative residual of the reduced solve
  int n_interior = 0;       ///< interior velocity DOFs
};

/// Eliminate boundary DOFs, append the mean-constraint row/column, factor
/// with sparse LU and check the residual (<= 1e-10, else SolveError). The
/// returned pressure is normalized to exact zero mean.
StokesSolution solve_system(const AssembledSystem& system);

StokesSolution solve_stokes(const PolyMesh& mesh, const SchemeConfig& config,
                            const VectorField& load, const VectorField& boundary);

/// Reduced system (matrix and right-hand side) in coordinate text format:
/// one "row col value" line per entry, then "rhs i value" lines.
void dump_system(const AssembledSystem& system, std::ostream& out);

/// Inf-sup diagnostic: generalized singular values of the divergence block
/// restricted to interior velocity DOFs, in the energy norm of the stiffness
/// and the pressure mass norm. beta is the second-smallest value (the
/// smallest belongs to the constant-pressure mode); dense computation, meant
/// for coarse meshes. pressure_degree -1 means the scheme's k-1; passing k
/// deliberately over-enriches the pressure space while the divergence form
/// stays at its scheme degree k-1, so spurious uncoupled pressure modes
/// appear (negative control).
struct InfSupReport {
  double beta = 0.0;
  double sigma_min = 0.0;
  int n_interior = 0;
  int n_pressure = 0;
};

InfSupReport infsup_estimate(const PolyMesh& mesh, const SchemeConfig& config,
                             int pressure_degree = -1);

} // namespace vem
