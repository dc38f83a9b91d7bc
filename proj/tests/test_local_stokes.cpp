// Local Stokes block tests: stiffness symmetry/kernel/consistency against
// integration-by-parts oracles, divergence-block exactness, load vectors,
// and the spectral stability diagnostic.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "vem/local_stokes.hpp"

using namespace vem;

namespace {

Polygon unit_square() {
  return {VectorRd(0, 0), VectorRd(1, 0), VectorRd(1, 1), VectorRd(0, 1)};
}

Polygon regular_hexagon() {
  Polygon p;
  for (int i = 0; i < 6; ++i) {
    const double a = M_PI / 3.0 * i;
    p.emplace_back(std::cos(a), std::sin(a));
  }
  return p;
}

Polygon scaled(const Polygon& poly, double factor, const VectorRd& shift) {
  Polygon out;
  for (const auto& v : poly) out.push_back(factor * v + shift);
  return out;
}

/// Laplacian of the element's i-th scaled monomial at x, from the exponents
/// (independent of the library's coefficient-space differentiation).
double monomial_laplacian(const ScaledMonomials& mono, int i, const VectorRd& x) {
  const MultiIndex a = multi_indices(mono.degree())[i];
  const double X = (x.x() - mono.center().x()) / mono.scale();
  const double Y = (x.y() - mono.center().y()) / mono.scale();
  double lap = 0.0;
  if (a.a1 >= 2) lap += a.a1 * (a.a1 - 1) * std::pow(X, a.a1 - 2) * std::pow(Y, a.a2);
  if (a.a2 >= 2) lap += a.a2 * (a.a2 - 1) * std::pow(X, a.a1) * std::pow(Y, a.a2 - 2);
  return lap / (mono.scale() * mono.scale());
}

Eigen::VectorXd dense_coeffs(const ElementOperators& op,
                             const std::function<double(const VectorRd&)>& f, int count,
                             int quad_degree) {
  const QuadratureRule rule = polygon_rule(op.polygon, quad_degree);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(count);
  for (int q = 0; q < rule.size(); ++q)
    c += rule.weights[q] * f(rule.nodes[q]) * op.basis.ortho_values(rule.nodes[q]).head(count);
  return c;
}

/// DOFs of a polynomial vector field with components of degree <= k.
Eigen::VectorXd poly_dofs(const ElementOperators& op, const VectorField& u) {
  Eigen::VectorXd stacked(2 * op.Nk);
  stacked.head(op.Nk) =
      dense_coeffs(op, [&](const VectorRd& x) { return u(x).x(); }, op.Nk,
                   2 * op.config.degree + 4);
  stacked.tail(op.Nk) =
      dense_coeffs(op, [&](const VectorRd& x) { return u(x).y(); }, op.Nk,
                   2 * op.config.degree + 4);
  return op.D * stacked;
}

double eval_sigma_poly(const Eigen::VectorXd& coeffs, double s) {
  double v = 0.0;
  for (int j = static_cast<int>(coeffs.size()) - 1; j >= 0; --j) v = v * s + coeffs(j);
  return v;
}

std::vector<Polygon> sample_elements() {
  std::vector<Polygon> polys = {unit_square(), regular_hexagon()};
  const PolyMesh mesh = generate_mesh(MeshFamily::M2, 1, 17);
  polys.push_back(mesh.cell_polygon(4));
  polys.push_back(mesh.cell_polygon(13));
  return polys;
}

} // namespace

TEST_CASE("stiffness symmetry, positive semidefiniteness, kernel") {
  for (const auto& poly : sample_elements()) {
    for (const Formulation f : {Formulation::F1, Formulation::F2}) {
      for (int k = 1; k <= 3; ++k) {
        const ElementOperators op = build_element_operators({f, k, true}, poly);
        const LocalStokes blocks = build_local_stokes(op);

        CHECK((blocks.A - blocks.A.transpose()).norm() <= 1e-12 * blocks.A.norm());

        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(blocks.A);
        const Eigen::VectorXd ev = eig.eigenvalues();
        const double lmax = ev(ev.size() - 1);
        CHECK(ev(0) > -1e-12 * lmax);
        // exactly two eigenvalues below 1e-10 * lambda_max: the constants
        CHECK(ev(1) < 1e-10 * lmax);
        CHECK(ev(2) > 1e-10 * lmax);

        for (const VectorRd c : {VectorRd(1.0, 0.0), VectorRd(0.4, -2.0)}) {
          const Eigen::VectorXd d = poly_dofs(op, [&](const VectorRd&) { return c; });
          CHECK((blocks.A * d).norm() < 1e-12 * lmax * d.norm());
          CHECK((blocks.B * d).norm() < 1e-12 * d.norm());
        }
      }
    }
  }
}

TEST_CASE("energy of a linear field equals the element area") {
  for (const auto& poly : sample_elements()) {
    const double area = polygon_signed_area(poly);
    for (const Formulation f : {Formulation::F1, Formulation::F2}) {
      const ElementOperators op = build_element_operators({f, 2, true}, poly);
      const LocalStokes blocks = build_local_stokes(op);
      const Eigen::VectorXd d =
          poly_dofs(op, [](const VectorRd& x) { return VectorRd(x.x(), 0.0); });
      CHECK(d.dot(blocks.A * d) == doctest::Approx(area).epsilon(1e-10));
      // divergence of (x, 0) is 1; the constant-monomial row integrates it
      CHECK((blocks.B * d)(0) == doctest::Approx(area).epsilon(1e-10));
    }
  }
}

TEST_CASE("stabilization vanishes on polynomial DOF vectors") {
  for (const auto& poly : sample_elements()) {
    for (const Formulation f : {Formulation::F1, Formulation::F2}) {
      for (int k = 1; k <= 3; ++k) {
        const ElementOperators op = build_element_operators({f, k, true}, poly);
        const LocalStokes blocks = build_local_stokes(op);
        CHECK((blocks.S * op.D).norm() < 1e-10 * (1.0 + op.D.norm()));
        CHECK(blocks.tau == doctest::Approx(blocks.Kc.trace() / (2.0 * op.Nk)));
      }
    }
  }
}

TEST_CASE("consistency of the stiffness against a pointwise oracle") {
  // For polynomial q and any DOF vector v (canonical basis):
  //   v^T A dofs(q) = int_P grad(v) : grad(q)
  //                 = -int_P v . Lap(q) + int_dP v . (grad(q) n)
  // with the right side evaluated through dense quadrature, analytic
  // monomial derivatives, edge traces and exact cell moments.
  for (const auto& poly : sample_elements()) {
    for (const Formulation f : {Formulation::F1, Formulation::F2}) {
      for (int k = 1; k <= 3; ++k) {
        const ElementOperators op = build_element_operators({f, k, true}, poly);
        const LocalStokes blocks = build_local_stokes(op);
        const Eigen::MatrixXd AD = blocks.A * op.D; // columns: dofs of (o_i,0),(0,o_i)

        for (int cq = 0; cq < 2; ++cq) {
          for (int i = 0; i < op.Nk; ++i) {
            // q = o_i e_cq
            Eigen::VectorXd oracle = Eigen::VectorXd::Zero(op.n_dofs);

            // -int_P v_cq Lap(o_i): o-coefficients of Lap(o_i) by quadrature
            const auto lap_oi = [&](const VectorRd& x) {
              double v = 0.0;
              for (int beta = 0; beta <= i; ++beta)
                v += op.basis.L(i, beta) * monomial_laplacian(op.basis.mono, beta, x);
              return v;
            };
            const Eigen::VectorXd gamma = dense_coeffs(op, lap_oi, op.Nk, 2 * k + 6);
            oracle -= op.moments[cq].transpose() * gamma;

            // boundary term with pointwise gradients
            for (std::size_t e = 0; e < op.edges.size(); ++e) {
              const auto& fr = op.edges[e];
              const VectorRd n_out = fr.sign * fr.normal;
              const EdgeMonomials em(fr.lo, fr.hi, 1);
              const QuadratureRule rule = segment_rule(fr.lo, fr.hi, 2 * k + 6);
              for (int q = 0; q < rule.size(); ++q) {
                VectorRd grad_oi = VectorRd::Zero();
                for (int beta = 0; beta <= i; ++beta)
                  grad_oi += op.basis.L(i, beta) * op.basis.mono.gradient(beta, rule.nodes[q]);
                const double s = em.coordinate(rule.nodes[q]);
                Eigen::VectorXd sig(k + 2);
                double spow = 1.0;
                for (int j = 0; j < k + 2; ++j) {
                  sig(j) = spow;
                  spow *= s;
                }
                oracle += rule.weights[q] * grad_oi.dot(n_out) *
                          (op.trace[cq][e].transpose() * sig);
              }
            }

            const Eigen::VectorXd got = AD.col(cq * op.Nk + i);
            CHECK((got - oracle).norm() < 1e-9 * (1.0 + oracle.norm()));
          }
        }
      }
    }
  }
}

TEST_CASE("divergence block matches the integration-by-parts oracle") {
  const PolyMesh mesh = generate_mesh(MeshFamily::M2, 1, 5);
  const VectorField u = [](const VectorRd& p) {
    return VectorRd(std::sin(p.x()) + p.y() * p.y(), std::cos(p.x() * p.y()));
  };
  for (const Formulation f : {Formulation::F1, Formulation::F2}) {
    for (int k = 1; k <= 3; ++k) {
      const SchemeConfig config{f, k, true};
      const DofMap dofs = build_dof_map(mesh, config);
      const Eigen::VectorXd global = interpolate(u, mesh, config, dofs);
      for (const int cell : {2, 9, 20}) {
        const ElementOperators op = build_element_operators(config, mesh.cell_polygon(cell),
                                                            cell_edge_reversed(mesh, cell));
        const LocalStokes blocks = build_local_stokes(op);
        Eigen::VectorXd d(op.n_dofs);
        for (int l = 0; l < op.n_dofs; ++l) d(l) = global(dofs.cell_velocity[cell][l]);

        const Eigen::VectorXd got = blocks.B * d;
        for (int i = 0; i < op.Nkm1; ++i) {
          double oracle = 0.0;
          // -int_P grad(m_i) . v via o-basis coefficients and cell moments
          for (int c = 0; c < 2; ++c) {
            const auto dmi = [&](const VectorRd& x) {
              return op.basis.mono.gradient(i, x)(c);
            };
            const Eigen::VectorXd gamma = dense_coeffs(op, dmi, op.Nk, 2 * k + 6);
            oracle -= gamma.dot(op.moments[c] * d);
          }
          // boundary term, dense 1D quadrature of m_i (v . n_out)
          for (std::size_t e = 0; e < op.edges.size(); ++e) {
            const auto& fr = op.edges[e];
            const VectorRd n_out = fr.sign * fr.normal;
            const EdgeMonomials em(fr.lo, fr.hi, 1);
            const Eigen::VectorXd tx = op.trace[0][e] * d;
            const Eigen::VectorXd ty = op.trace[1][e] * d;
            const QuadratureRule rule = segment_rule(fr.lo, fr.hi, 2 * k + 8);
            for (int q = 0; q < rule.size(); ++q) {
              const double s = em.coordinate(rule.nodes[q]);
              const double vn = eval_sigma_poly(tx, s) * n_out.x() +
                                eval_sigma_poly(ty, s) * n_out.y();
              oracle += rule.weights[q] * op.basis.mono.value(i, rule.nodes[q]) * vn;
            }
          }
          CHECK(got(i) == doctest::Approx(oracle).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("load vector") {
  const Polygon poly = regular_hexagon();

  SUBCASE("zero forcing gives a zero load") {
    const ElementOperators op = build_element_operators({Formulation::F1, 2, true}, poly);
    const Eigen::VectorXd load =
        local_load(op, [](const VectorRd&) { return VectorRd::Zero().eval(); });
    CHECK(load.norm() == 0.0);
  }

  SUBCASE("constant forcing, lowest-order regular variant") {
    // kbar = 0: f_P^T dofs(q) = int_P P0_0(q) . f = int_P q_x for f = (1,0)
    for (const Formulation f : {Formulation::F1, Formulation::F2}) {
      const ElementOperators op = build_element_operators({f, 1, false}, poly);
      CHECK(op.config.rhs_degree() == 0);
      const Eigen::VectorXd load =
          local_load(op, [](const VectorRd&) { return VectorRd(1.0, 0.0); });
      const std::vector<VectorField> fields = {
          [](const VectorRd&) { return VectorRd(3.0, -1.0); },
          [](const VectorRd& x) { return VectorRd(x.y() - 2 * x.x(), x.x()); }};
      for (const auto& q : fields) {
        const Eigen::VectorXd d = poly_dofs(op, q);
        const QuadratureRule rule = polygon_rule(poly, 6);
        double exact = 0.0;
        for (int i = 0; i < rule.size(); ++i) exact += rule.weights[i] * q(rule.nodes[i]).x();
        CHECK(load.dot(d) == doctest::Approx(exact).epsilon(1e-11));
      }
    }
  }

  SUBCASE("polynomial forcing matches the duality oracle exactly") {
    // f polynomial, q in [P_k]^2: load^T dofs(q) = int_P P0_kbar(f) . q
    for (const Formulation form : {Formulation::F1, Formulation::F2}) {
      for (const bool enhanced : {true, false}) {
        for (int k = 1; k <= 3; ++k) {
          const ElementOperators op = build_element_operators({form, k, enhanced}, poly);
          const int kbar = op.config.rhs_degree();
          const VectorField f = [](const VectorRd& p) {
            return VectorRd(1.0 + p.x() - 0.5 * p.y() * p.x(), p.y() * p.y() - 2.0);
          };
          const Eigen::VectorXd load = local_load(op, f);

          // dense projection of f at degree kbar, then exact product integral
          Eigen::MatrixXd Fc(poly_dim(kbar), 2);
          Fc.col(0) = dense_coeffs(op, [&](const VectorRd& x) { return f(x).x(); },
                                   poly_dim(kbar), 2 * k + 8);
          Fc.col(1) = dense_coeffs(op, [&](const VectorRd& x) { return f(x).y(); },
                                   poly_dim(kbar), 2 * k + 8);
          const VectorField q = [](const VectorRd& p) {
            return VectorRd(p.x() * p.y() - 1.0, 0.3 * p.x() + p.y());
          };
          const Eigen::VectorXd d = poly_dofs(op, q);
          Eigen::VectorXd qc[2];
          qc[0] = dense_coeffs(op, [&](const VectorRd& x) { return q(x).x(); },
                               poly_dim(kbar), 2 * k + 8);
          qc[1] = dense_coeffs(op, [&](const VectorRd& x) { return q(x).y(); },
                               poly_dim(kbar), 2 * k + 8);
          const double exact = Fc.col(0).dot(qc[0]) + Fc.col(1).dot(qc[1]);
          CHECK(load.dot(d) == doctest::Approx(exact).epsilon(1e-10));
        }
      }
    }
  }

  SUBCASE("smooth forcing stays close to a dense oracle") {
    const ElementOperators op = build_element_operators({Formulation::F2, 2, true}, poly);
    const VectorField f = [](const VectorRd& p) {
      return VectorRd(std::sin(p.x()) * p.y(), std::exp(0.3 * p.y()));
    };
    const Eigen::VectorXd load = local_load(op, f);
    const VectorField q = [](const VectorRd& p) {
      return VectorRd(p.x() * p.x() - p.y(), p.x() + 1.0);
    };
    const Eigen::VectorXd d = poly_dofs(op, q);
    Eigen::VectorXd fc[2], qc[2];
    for (int c = 0; c < 2; ++c) {
      fc[c] = dense_coeffs(op, [&](const VectorRd& x) { return f(x)(c); }, op.Nk, 14);
      qc[c] = dense_coeffs(op, [&](const VectorRd& x) { return q(x)(c); }, op.Nk, 14);
    }
    CHECK(load.dot(d) ==
          doctest::Approx(fc[0].dot(qc[0]) + fc[1].dot(qc[1])).epsilon(1e-9));
  }
}

TEST_CASE("stability diagnostic") {
  for (const auto& poly : sample_elements()) {
    for (const Formulation f : {Formulation::F1, Formulation::F2}) {
      for (int k = 1; k <= 3; ++k) {
        const ElementOperators op = build_element_operators({f, k, true}, poly);
        const LocalStokes blocks = build_local_stokes(op);

        const StabilitySpectrum spectrum = stability_diagnostic(op, blocks.A);
        CHECK(spectrum.alpha_low > 0.0);
        CHECK(std::isfinite(spectrum.alpha_high));
        CHECK(spectrum.alpha_high >= spectrum.alpha_low);

        // removing the stabilization exposes the projector kernel
        const StabilitySpectrum bare = stability_diagnostic(op, blocks.Kc);
        CHECK(std::abs(bare.alpha_low) < 1e-10);
      }
    }
  }

  SUBCASE("the spectrum is scale-invariant") {
    const Polygon base = regular_hexagon();
    for (const Formulation f : {Formulation::F1, Formulation::F2}) {
      const ElementOperators op1 = build_element_operators({f, 2, true}, base);
      const ElementOperators op2 =
          build_element_operators({f, 2, true}, scaled(base, 2.0, VectorRd(5.0, 1.0)));
      const StabilitySpectrum s1 = stability_diagnostic(op1, build_local_stokes(op1).A);
      const StabilitySpectrum s2 = stability_diagnostic(op2, build_local_stokes(op2).A);
      CHECK(s1.alpha_high / s1.alpha_low ==
            doctest::Approx(s2.alpha_high / s2.alpha_low).epsilon(1e-8));
    }
  }
}
