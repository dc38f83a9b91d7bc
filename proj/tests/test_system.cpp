// Global system tests: assembly scatter-add identities, symmetry, Dirichlet
// handling, polynomial patch tests across every family/formulation/variant,
// solver determinism, and the inf-sup diagnostic with its negative control.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "vem/system.hpp"

using namespace vem;

namespace {

struct PatchCase {
  int degree;
  VectorField u;
  std::function<double(const VectorRd&)> p; ///< zero mean on the unit square
  VectorField f;                            ///< -Lap(u) + grad(p)
};

PatchCase patch_case(int k) {
  switch (k) {
  case 1:
    // For k = 1 the discrete pressure space holds constants only, and the sole
    // zero-mean constant is p = 0; any linear velocity is then load free.
    return {1, [](const VectorRd& x) { return VectorRd(x.x() - 2 * x.y(), -2 * x.x() - x.y()); },
            [](const VectorRd&) { return 0.0; },
            [](const VectorRd&) { return VectorRd(0.0, 0.0); }};
  case 2:
    return {2,
            [](const VectorRd& q) {
              const double x = q.x(), y = q.y();
              return VectorRd(-x * x + 3 * y * y, -3 * x * x + 2 * x * y);
            },
            [](const VectorRd& x) { return x.x() + x.y() - 1.0; },
            [](const VectorRd&) { return VectorRd(-3.0, 7.0); }};
  default:
    REQUIRE(k == 3);
    return {3,
            [](const VectorRd& q) {
              const double x = q.x(), y = q.y();
              return VectorRd(2 * x * x * y - 4 * y * y * y,
                              -4 * x * x * x - 2 * x * y * y);
            },
            [](const VectorRd& q) {
              return q.x() * q.y() + q.x() * q.x() - 7.0 / 12.0;
            },
            [](const VectorRd& q) {
              return VectorRd(2 * q.x() + 21 * q.y(), 29 * q.x());
            }};
  }
}

/// Exact monomial coefficients of a degree <= k-1 pressure on one cell.
Eigen::VectorXd exact_pressure_coeffs(const Polygon& poly, int k,
                                      const std::function<double(const VectorRd&)>& p) {
  const int n = poly_dim(k - 1);
  const ElementBasis basis = make_element_basis(poly, k - 1, 2 * k + 4);
  const QuadratureRule rule = polygon_rule(poly, 2 * k + 4);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int q = 0; q < rule.size(); ++q)
    rhs += rule.weights[q] * p(rule.nodes[q]) * basis.mono.values(rule.nodes[q]);
  return basis.H.ldlt().solve(rhs);
}

double global_div_norm(const PolyMesh& mesh, const SchemeConfig& config, const DofMap& dofs,
                       const Eigen::VectorXd& velocity) {
  double sq = 0.0;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const ElementOperators op = build_element_operators(config, mesh.cell_polygon(cell),
                                                        cell_edge_reversed(mesh, cell));
    Eigen::VectorXd d(op.n_dofs);
    for (int l = 0; l < op.n_dofs; ++l) d(l) = velocity(dofs.cell_velocity[cell][l]);
    sq += (op.Pdiv_km1 * d).squaredNorm();
  }
  return std::sqrt(sq);
}

double pressure_mean(const PolyMesh& mesh, const DofMap& dofs,
                     const Eigen::VectorXd& pressure) {
  const int k = dofs.config.degree;
  double total = 0.0;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const ElementBasis basis = make_element_basis(mesh.cell_polygon(cell), k - 1, 2 * k + 2);
    total += basis.H.row(0).dot(
        pressure.segment(dofs.cell_pressure_offset[cell], dofs.pressure_per_cell));
  }
  return total; // domain area is 1
}

const VectorField kZeroField = [](const VectorRd&) { return VectorRd(0.0, 0.0); };

} // namespace

TEST_CASE("one-element assembly equals the local blocks") {
  const Polygon square = {VectorRd(0, 0), VectorRd(1, 0), VectorRd(1, 1), VectorRd(0, 1)};
  const PolyMesh mesh = build_mesh(square, {{0, 1, 2, 3}});
  const SchemeConfig config{Formulation::F1, 2, true};
  const VectorField f = [](const VectorRd& x) { return VectorRd(x.y(), 1.0); };

  const AssembledSystem sys = assemble_system(mesh, config, f, kZeroField);
  const ElementOperators op =
      build_element_operators(config, mesh.cell_polygon(0), cell_edge_reversed(mesh, 0));
  const LocalStokes blocks = build_local_stokes(op);
  const Eigen::VectorXd load = local_load(op, f);

  const Eigen::MatrixXd A = Eigen::MatrixXd(sys.A);
  const Eigen::MatrixXd B = Eigen::MatrixXd(sys.B);
  const auto& vel = sys.dofs.cell_velocity[0];
  for (int i = 0; i < op.n_dofs; ++i) {
    CHECK(sys.load(vel[i]) == doctest::Approx(load(i)));
    for (int j = 0; j < op.n_dofs; ++j) CHECK(A(vel[i], vel[j]) == blocks.A(i, j));
    for (int r = 0; r < sys.dofs.pressure_per_cell; ++r)
      CHECK(B(r, vel[i]) == blocks.B(r, i));
  }
  CHECK(sys.mean_row(0) == doctest::Approx(1.0));
  CHECK(sys.mean_row.size() == 3);
}

TEST_CASE("two elements accumulate on the shared edge") {
  const Polygon verts = {VectorRd(0, 0), VectorRd(1, 0), VectorRd(2, 0),
                         VectorRd(0, 1), VectorRd(1, 1), VectorRd(2, 1)};
  const PolyMesh mesh = build_mesh(verts, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  const SchemeConfig config{Formulation::F2, 2, true};
  const AssembledSystem sys = assemble_system(mesh, config, kZeroField, kZeroField);

  Eigen::MatrixXd manual = Eigen::MatrixXd::Zero(sys.dofs.n_velocity, sys.dofs.n_velocity);
  for (int cell = 0; cell < 2; ++cell) {
    const ElementOperators op = build_element_operators(config, mesh.cell_polygon(cell),
                                                        cell_edge_reversed(mesh, cell));
    const LocalStokes blocks = build_local_stokes(op);
    const auto& vel = sys.dofs.cell_velocity[cell];
    for (int i = 0; i < op.n_dofs; ++i)
      for (int j = 0; j < op.n_dofs; ++j) manual(vel[i], vel[j]) += blocks.A(i, j);
  }
  CHECK((Eigen::MatrixXd(sys.A) - manual).norm() < 1e-13 * manual.norm());

  // the stiffness is symmetric by construction
  const Eigen::SparseMatrix<double> At = sys.A.transpose();
  CHECK((Eigen::MatrixXd(sys.A) - Eigen::MatrixXd(At)).norm() == 0.0);
}

TEST_CASE("homogeneous boundary data leaves zeros on the boundary") {
  const PolyMesh mesh = generate_mesh(MeshFamily::M1, 1, 1);
  const SchemeConfig config{Formulation::F1, 1, true};
  const VectorField f = [](const VectorRd& x) { return VectorRd(std::sin(x.x()), x.y()); };
  const StokesSolution sol = solve_stokes(mesh, config, f, kZeroField);
  const DofMap dofs = build_dof_map(mesh, config);
  for (int i = 0; i < dofs.n_velocity; ++i)
    if (dofs.velocity_on_boundary[i]) CHECK(sol.velocity(i) == 0.0);
  CHECK(sol.residual <= 1e-10);
}

TEST_CASE("constant velocity patch test") {
  const PolyMesh mesh = generate_mesh(MeshFamily::M2, 1, 9);
  const VectorField u = [](const VectorRd&) { return VectorRd(0.7, -0.3); };
  for (const Formulation form : {Formulation::F1, Formulation::F2}) {
    const SchemeConfig config{form, 1, true};
    const StokesSolution sol = solve_stokes(mesh, config, kZeroField, u);
    const DofMap dofs = build_dof_map(mesh, config);
    const Eigen::VectorXd exact = interpolate(u, mesh, config, dofs);
    CHECK((sol.velocity - exact).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("polynomial patch tests: every family, formulation, variant, degree") {
  for (const MeshFamily family : {MeshFamily::M1, MeshFamily::M2, MeshFamily::M3}) {
    const PolyMesh mesh = generate_mesh(family, 1, 4);
    for (int k = 1; k <= 3; ++k) {
      const PatchCase pc = patch_case(k);
      for (const Formulation form : {Formulation::F1, Formulation::F2}) {
        for (const bool enhanced : {true, false}) {
          const SchemeConfig config{form, k, enhanced};
          const DofMap dofs = build_dof_map(mesh, config);
          const StokesSolution sol = solve_stokes(mesh, config, pc.f, pc.u);

          CHECK(sol.residual <= 1e-10);
          CHECK(std::abs(sol.multiplier) < 1e-10);

          const Eigen::VectorXd exact_u = interpolate(pc.u, mesh, config, dofs);
          const double uscale = 1.0 + exact_u.lpNorm<Eigen::Infinity>();
          CHECK((sol.velocity - exact_u).lpNorm<Eigen::Infinity>() < 1e-9 * uscale);

          for (int cell = 0; cell < mesh.n_cells(); ++cell) {
            const Eigen::VectorXd pc_exact =
                exact_pressure_coeffs(mesh.cell_polygon(cell), k, pc.p);
            const Eigen::VectorXd got = sol.pressure.segment(
                dofs.cell_pressure_offset[cell], dofs.pressure_per_cell);
            CHECK((got - pc_exact).lpNorm<Eigen::Infinity>() < 1e-9 * (1.0 + pc_exact.norm()));
          }

          CHECK(global_div_norm(mesh, config, dofs, sol.velocity) <
                1e-10 * (1.0 + sol.velocity.norm()));
          CHECK(std::abs(pressure_mean(mesh, dofs, sol.pressure)) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("solver determinism") {
  const PolyMesh mesh = generate_mesh(MeshFamily::M2, 2, 42);
  const SchemeConfig config{Formulation::F2, 2, true};
  const VectorField f = [](const VectorRd& x) {
    return VectorRd(std::sin(3 * x.x()) + x.y(), std::cos(2 * x.y()));
  };
  const VectorField g = [](const VectorRd& x) {
    return VectorRd(x.y() * x.y(), std::sin(x.x()));
  };
  const StokesSolution a = solve_stokes(mesh, config, f, g);
  const StokesSolution b = solve_stokes(mesh, config, f, g);
  CHECK((a.velocity - b.velocity).norm() == 0.0);
  CHECK((a.pressure - b.pressure).norm() == 0.0);
  CHECK(a.multiplier == b.multiplier);
}

TEST_CASE("system dump is deterministic and complete") {
  const PolyMesh mesh = generate_mesh(MeshFamily::M1, 1, 2);
  const SchemeConfig config{Formulation::F1, 1, true};
  const AssembledSystem sys =
      assemble_system(mesh, config, kZeroField, kZeroField);
  std::ostringstream s1, s2;
  dump_system(sys, s1);
  dump_system(sys, s2);
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().rfind("# reduced", 0) == 0);
  CHECK(s1.str().find("rhs 0 ") != std::string::npos);
}

TEST_CASE("inf-sup estimate and negative control") {
  for (const Formulation form : {Formulation::F1, Formulation::F2}) {
    const SchemeConfig config{form, 1, true};
    double beta_prev = 0.0;
    for (int level = 1; level <= 2; ++level) {
      const PolyMesh mesh = generate_mesh(MeshFamily::M1, level, 12);
      const InfSupReport report = infsup_estimate(mesh, config);
      CAPTURE(formulation_name(form));
      CAPTURE(level);
      CHECK(report.beta > 1e-3);
      CHECK(report.sigma_min < 1e-8); // constant-pressure mode
      if (level > 1) {
        CHECK(report.beta / beta_prev < 4.0);
        CHECK(beta_prev / report.beta < 4.0);
      }
      beta_prev = report.beta;
    }

    // enlarging the pressure space to P_k produces spurious modes
    const PolyMesh mesh = generate_mesh(MeshFamily::M1, 1, 12);
    const InfSupReport healthy = infsup_estimate(mesh, config);
    const InfSupReport control = infsup_estimate(mesh, config, config.degree);
    CHECK(control.beta < healthy.beta / 10.0);
  }
  CHECK_THROWS_AS(
      infsup_estimate(generate_mesh(MeshFamily::M1, 1, 0), SchemeConfig{Formulation::F1, 1, true}, 3),
      Error);
}
