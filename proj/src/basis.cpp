#include "vem/basis.hpp"

#include <cmath>

namespace vem {

std::vector<MultiIndex> multi_indices(int ell) {
  std::vector<MultiIndex> out;
  out.reserve(poly_dim(ell));
  for (int d = 0; d <= ell; ++d)
    for (int a2 = 0; a2 <= d; ++a2) out.push_back({d - a2, a2});
  return out;
}

ScaledMonomials::ScaledMonomials(const VectorRd& center, double h, int degree)
    : m_center(center), m_h(h), m_degree(degree), m_alphas(multi_indices(degree)) {
  if (h <= 0.0) throw GeometryError("scaled monomials: nonpositive scale");
}

double ScaledMonomials::value(int i, const VectorRd& x) const {
  const MultiIndex& a = m_alphas[i];
  const VectorRd z = (x - m_center) / m_h;
  return std::pow(z.x(), a.a1) * std::pow(z.y(), a.a2);
}

VectorRd ScaledMonomials::gradient(int i, const VectorRd& x) const {
  const MultiIndex& a = m_alphas[i];
  const VectorRd z = (x - m_center) / m_h;
  VectorRd g = VectorRd::Zero();
  if (a.a1 > 0)
    g.x() = a.a1 / m_h * std::pow(z.x(), a.a1 - 1) * std::pow(z.y(), a.a2);
  if (a.a2 > 0)
    g.y() = a.a2 / m_h * std::pow(z.x(), a.a1) * std::pow(z.y(), a.a2 - 1);
  return g;
}

Eigen::VectorXd ScaledMonomials::values(const VectorRd& x) const {
  const VectorRd z = (x - m_center) / m_h;
  Eigen::VectorXd v(dimension());
  v(0) = 1.0;
  for (int i = 1; i < dimension(); ++i) {
    const MultiIndex& a = m_alphas[i];
    // Reduce along x when possible, else along y; both parents precede i.
    if (a.a1 > 0)
      v(i) = v(multi_index_position({a.a1 - 1, a.a2})) * z.x();
    else
      v(i) = v(multi_index_position({a.a1, a.a2 - 1})) * z.y();
  }
  return v;
}

Eigen::MatrixXd ScaledMonomials::diff_map(int c) const {
  const int n = dimension();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const MultiIndex& a = m_alphas[i];
    if (c == 0 && a.a1 > 0)
      D(multi_index_position({a.a1 - 1, a.a2}), i) = a.a1 / m_h;
    if (c == 1 && a.a2 > 0)
      D(multi_index_position({a.a1, a.a2 - 1}), i) = a.a2 / m_h;
  }
  return D;
}

EdgeMonomials::EdgeMonomials(const VectorRd& a, const VectorRd& b, int degree)
    : m_mid(0.5 * (a + b)), m_degree(degree) {
  m_length = (b - a).norm();
  if (m_length <= 0.0) throw GeometryError("edge monomials: zero-length edge");
  m_tangent = (b - a) / m_length;
}

double EdgeMonomials::value(int j, double s) const { return std::pow(s, j); }

Eigen::VectorXd EdgeMonomials::values(double s) const {
  Eigen::VectorXd v(dimension());
  v(0) = 1.0;
  for (int j = 1; j < dimension(); ++j) v(j) = v(j - 1) * s;
  return v;
}

Eigen::MatrixXd gram_matrix(const ScaledMonomials& basis, const QuadratureRule& quad) {
  const int n = basis.dimension();
  Eigen::MatrixXd V(quad.size(), n);
  for (int q = 0; q < quad.size(); ++q) V.row(q) = basis.values(quad.nodes[q]).transpose();
  return V.transpose() * quad.weights_as_vector().asDiagonal() * V;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& H) {
  const int n = static_cast<int>(H.rows());
  const double floor = 1e-13 * H.trace();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n); // Cholesky factor, H = C C^T
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = H(i, j);
      for (int k = 0; k < j; ++k) s -= C(i, k) * C(j, k);
      if (i == j) {
        if (s < floor)
          throw ConditioningError("orthonormalize: mass matrix pivot below threshold");
        C(i, i) = std::sqrt(s);
      } else {
        C(i, j) = s / C(j, j);
      }
    }
  }
  // L = C^{-1} by forward substitution.
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
  C.triangularView<Eigen::Lower>().solveInPlace(L);
  return L;
}

ElementBasis make_element_basis(const Polygon& poly, int degree, int quad_degree) {
  require_valid_polygon(poly);
  ScaledMonomials mono(polygon_centroid(poly), polygon_diameter(poly), degree);
  QuadratureRule quad = polygon_rule(poly, quad_degree);
  Eigen::MatrixXd H = gram_matrix(mono, quad);
  Eigen::MatrixXd L = orthonormalize(H);
  Eigen::MatrixXd Dx = mono.diff_map(0);
  Eigen::MatrixXd Dy = mono.diff_map(1);
  return ElementBasis{std::move(mono), std::move(quad), std::move(H), std::move(L),
                      std::move(Dx), std::move(Dy)};
}

} // namespace vem
