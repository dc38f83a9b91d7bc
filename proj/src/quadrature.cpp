#include "vem/quadrature.hpp"

#include <cmath>
#include <map>

namespace vem {

namespace {

// Golub-Welsch: nodes/weights from the symmetric tridiagonal Jacobi matrix of
// the three-term recurrence (diagonal a_i, subdiagonal sqrt(b_i), first
// moment mu0 of the weight).
std::pair<Eigen::VectorXd, Eigen::VectorXd> golub_welsch(const Eigen::VectorXd& a,
                                                         const Eigen::VectorXd& b,
                                                         double mu0) {
  const int n = static_cast<int>(a.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = a(i);
  for (int i = 0; i + 1 < n; ++i) {
    const double s = std::sqrt(b(i + 1));
    J(i, i + 1) = s;
    J(i + 1, i) = s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd nodes = es.eigenvalues();
  Eigen::VectorXd weights(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = mu0 * v0 * v0;
  }
  return {nodes, weights};
}

int points_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

} // namespace

const std::pair<Eigen::VectorXd, Eigen::VectorXd>& gauss_legendre(int n) {
  static std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 1; i < n; ++i) b(i) = i * i / (4.0 * i * i - 1.0);
  return cache.emplace(n, golub_welsch(a, b, 2.0)).first->second;
}

const std::pair<Eigen::VectorXd, Eigen::VectorXd>& gauss_jacobi10(int n) {
  static std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  // Recurrence coefficients for the Jacobi weight (1-x)^1 (1+x)^0 on [-1,1].
  Eigen::VectorXd a(n), b(n);
  b(0) = 0.0;
  for (int i = 0; i < n; ++i) a(i) = -1.0 / ((2.0 * i + 1.0) * (2.0 * i + 3.0));
  for (int i = 1; i < n; ++i) b(i) = i * (i + 1.0) / ((2.0 * i + 1.0) * (2.0 * i + 1.0));
  return cache.emplace(n, golub_welsch(a, b, 2.0)).first->second;
}

QuadratureRule segment_rule(const VectorRd& a, const VectorRd& b, int degree) {
  const int n = points_for_degree(degree);
  const auto& [x, w] = gauss_legendre(n);
  const double len = (b - a).norm();
  if (len == 0.0) throw GeometryError("segment rule: zero-length segment");
  QuadratureRule rule;
  rule.nodes.reserve(n);
  rule.weights.reserve(n);
  const VectorRd mid = 0.5 * (a + b);
  const VectorRd half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(mid + x(i) * half);
    rule.weights.push_back(0.5 * len * w(i));
  }
  return rule;
}

QuadratureRule triangle_rule(const VectorRd& a, const VectorRd& b, const VectorRd& c,
                             int degree) {
  const int n = points_for_degree(degree);
  const auto& [xu, wu] = gauss_jacobi10(n); // handles the collapse factor (1-u)
  const auto& [xw, ww] = gauss_legendre(n);
  const double area2 = cross2(b - a, c - a); // signed, twice the area
  QuadratureRule rule;
  rule.nodes.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (xu(i) + 1.0);
    const double au = 0.25 * wu(i);
    for (int j = 0; j < n; ++j) {
      const double v = (1.0 - u) * 0.5 * (xw(j) + 1.0);
      const double aw = 0.5 * ww(j);
      rule.nodes.push_back(a + u * (b - a) + v * (c - a));
      rule.weights.push_back(std::abs(area2) * au * aw);
    }
  }
  return rule;
}

QuadratureRule polygon_rule(const Polygon& poly, int degree) {
  QuadratureRule rule;
  for (const auto& tri : triangulate(poly)) {
    QuadratureRule tr = triangle_rule(tri[0], tri[1], tri[2], degree);
    rule.nodes.insert(rule.nodes.end(), tr.nodes.begin(), tr.nodes.end());
    rule.weights.insert(rule.weights.end(), tr.weights.begin(), tr.weights.end());
  }
  return rule;
}

} // namespace vem
