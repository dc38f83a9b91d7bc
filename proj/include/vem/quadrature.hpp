// Gauss-type quadrature on segments, triangles and polygons.
//
// Triangle rules come from a tensor Gauss-Jacobi x Gauss-Legendre product on
// the collapsed square (the Jacobi weight absorbs the collapse Jacobian, so a
// rule of requested degree is exact for all polynomials of that total
// degree). Polygon rules concatenate triangle rules over a triangulation.

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "vem/geometry.hpp"

namespace vem {

struct QuadratureRule {
  std::vector<VectorRd> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }

  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  Eigen::VectorXd weights_as_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(weights.data(), weights.size());
  }
};

/// n-point Gauss-Legendre rule on [-1,1] (weight 1), exact to degree 2n-1.
/// Returned as (nodes, weights); cached per n.
const std::pair<Eigen::VectorXd, Eigen::VectorXd>& gauss_legendre(int n);

/// n-point Gauss-Jacobi rule on [-1,1] with weight (1-x), exact to degree
/// 2n-1 against that weight; cached per n.
const std::pair<Eigen::VectorXd, Eigen::VectorXd>& gauss_jacobi10(int n);

/// Rule on the physical segment [a,b], exact for polynomials of the given
/// degree along the segment. Weights sum to |b-a|.
QuadratureRule segment_rule(const VectorRd& a, const VectorRd& b, int degree);

/// Rule on the triangle (a,b,c), exact for bivariate polynomials of the given
/// total degree. Weights sum to the triangle area.
QuadratureRule triangle_rule(const VectorRd& a, const VectorRd& b, const VectorRd& c,
                             int degree);

/// Rule on a polygon, exact for the given total degree. Triangulates with a
/// centroid fan when the centroid sees the whole polygon, ear clipping
/// otherwise.
QuadratureRule polygon_rule(const Polygon& poly, int degree);

} // namespace vem
