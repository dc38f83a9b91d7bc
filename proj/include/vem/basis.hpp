// Scaled monomial bases on elements and edges, and their per-element
// orthonormalization.
//
// Element monomials are m_a(x) = ((x - x_P)/h_P)^a1 ((y - y_P)/h_P)^a2 with
// x_P the centroid and h_P the diameter; edge monomials are powers of the
// midpoint-centered arclength coordinate s in [-1/2, 1/2]. Multi-indices are
// ordered by total degree, then by decreasing first exponent, so position 0
// is the constant, 1 the x-term, 2 the y-term.

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "vem/geometry.hpp"
#include "vem/quadrature.hpp"

namespace vem {

/// dim P_ell in two variables; 0 for negative ell.
inline int poly_dim(int ell) { return ell < 0 ? 0 : (ell + 1) * (ell + 2) / 2; }

struct MultiIndex {
  int a1 = 0;
  int a2 = 0;
  int degree() const { return a1 + a2; }
};

/// The first poly_dim(ell) multi-indices in canonical order.
std::vector<MultiIndex> multi_indices(int ell);

/// Position of a multi-index in the canonical order.
inline int multi_index_position(const MultiIndex& a) {
  const int d = a.degree();
  return d * (d + 1) / 2 + a.a2;
}

/// Monomial family on one element, scaled by centroid and diameter.
class ScaledMonomials {
public:
  ScaledMonomials(const VectorRd& center, double h, int degree);

  int degree() const { return m_degree; }
  int dimension() const { return poly_dim(m_degree); }
  const VectorRd& center() const { return m_center; }
  double scale() const { return m_h; }

  double value(int i, const VectorRd& x) const;
  VectorRd gradient(int i, const VectorRd& x) const;

  /// All basis values at x (recursive evaluation, one multiplication each).
  Eigen::VectorXd values(const VectorRd& x) const;

  /// Coefficient-space differentiation: coeffs(df/dx_c) = diff_map(c) * coeffs(f).
  Eigen::MatrixXd diff_map(int c) const;

private:
  VectorRd m_center;
  double m_h;
  int m_degree;
  std::vector<MultiIndex> m_alphas;
};

/// 1D monomials s^j on an edge, with s the arclength coordinate centered at
/// the edge midpoint and scaled by the edge length (s in [-1/2, 1/2]).
class EdgeMonomials {
public:
  EdgeMonomials(const VectorRd& a, const VectorRd& b, int degree);

  int degree() const { return m_degree; }
  int dimension() const { return m_degree + 1; }
  double length() const { return m_length; }
  const VectorRd& midpoint() const { return m_mid; }
  const VectorRd& tangent() const { return m_tangent; } ///< unit, a -> b

  double coordinate(const VectorRd& x) const {
    return (x - m_mid).dot(m_tangent) / m_length;
  }
  double value(int j, double s) const;
  Eigen::VectorXd values(double s) const;

private:
  VectorRd m_mid;
  VectorRd m_tangent;
  double m_length;
  int m_degree;
};

/// Mass (Gram) matrix of a monomial family under a quadrature rule.
Eigen::MatrixXd gram_matrix(const ScaledMonomials& basis, const QuadratureRule& quad);

/// Lower-triangular L with L H L^T = I, from a Cholesky factorization of H.
/// Rows of L are the coefficients of an orthonormal basis in the monomials.
/// Throws ConditioningError when a pivot falls below 1e-13 * trace(H).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& H);

/// Per-element bundle: monomials up to a requested degree, an element
/// quadrature, the monomial mass matrix and its orthonormalizer, and the
/// coefficient-space derivative maps.
struct ElementBasis {
  ScaledMonomials mono;
  QuadratureRule quad;
  Eigen::MatrixXd H;  ///< monomial mass matrix
  Eigen::MatrixXd L;  ///< orthonormalizer: rows = orthonormal basis in monomial coords
  Eigen::MatrixXd Dx; ///< d/dx in coefficient space
  Eigen::MatrixXd Dy; ///< d/dy in coefficient space

  int dimension() const { return mono.dimension(); }

  /// Values of the orthonormal basis at x.
  Eigen::VectorXd ortho_values(const VectorRd& x) const { return L * mono.values(x); }

  /// Monomial coefficients of the i-th orthonormal basis function.
  Eigen::VectorXd ortho_coeffs(int i) const { return L.row(i).transpose(); }
};

/// Build the bundle on a polygon. The quadrature degree must cover products
/// of two basis functions (callers typically pass at least 2*degree).
ElementBasis make_element_basis(const Polygon& poly, int degree, int quad_degree);

} // namespace vem
