// Element-level Stokes blocks: consistency + stabilization stiffness,
// divergence coupling against the pressure monomials, load vector, and a
// spectral stability diagnostic.
//
// The stiffness is A_P = K_c + tau * S with
//   K_c = sum_{c,d} Pgrad[c][d]^T Pgrad[c][d]   (orthonormal mass = identity),
//   S   = (I - D Pnabla)^T (I - D Pnabla)        (dofi-dofi residual),
//   tau = trace(K_c) / n_dofs.
// The pressure test functions are the element's scaled monomials of degree
// k-1 (not orthonormalized), so the constant-pressure coefficient integrates
// the divergence against 1 and the global zero-mean row becomes |P| per cell.

#pragma once

#include <Eigen/Dense>

#include "vem/spaces.hpp"

namespace vem {

struct LocalStokes {
  Eigen::MatrixXd A;  ///< n x n stiffness, exactly symmetric
  Eigen::MatrixXd Kc; ///< consistency part of A
  Eigen::MatrixXd S;  ///< unscaled stabilization (I - D Pnabla)^T (...)
  double tau = 0.0;   ///< stabilization weight trace(Kc)/n
  Eigen::MatrixXd B;  ///< dim P_{k-1} x n divergence block, monomial test rows
};

LocalStokes build_local_stokes(const ElementOperators& op);

/// Load vector f_P(j) = int_P (P0_{kbar} f) . (basis j), computed through the
/// moment rows of degree kbar (kbar = k enhanced, max(0, k-2) regular).
Eigen::VectorXd local_load(const ElementOperators& op, const VectorField& f);

/// Extreme generalized eigenvalues of A against a reference energy that is
/// exact on the polynomial subspace (K_c + tau * projector onto the DOF
/// complement of range D), both restricted to the complement of the constant
/// fields. alpha_low > 0 certifies that the stabilization controls the
/// projector kernel; the ratio is scale-invariant.
struct StabilitySpectrum {
  double alpha_low = 0.0;
  double alpha_high = 0.0;
};

StabilitySpectrum stability_diagnostic(const ElementOperators& op, const Eigen::MatrixXd& A);

} // namespace vem
