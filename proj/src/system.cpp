#include "vem/system.hpp"

#include <Eigen/SparseLU>

#include <cstdio>
#include <ostream>
#include <vector>

namespace vem {

AssembledSystem assemble_system(const PolyMesh& mesh, const SchemeConfig& config,
                                const VectorField& load, const VectorField& boundary) {
  config.validate();
  AssembledSystem sys;
  sys.dofs = build_dof_map(mesh, config);
  const int nv = sys.dofs.n_velocity;
  const int np = sys.dofs.n_pressure;
  const int per_cell = sys.dofs.pressure_per_cell;

  std::vector<Eigen::Triplet<double>> a_trip, b_trip;
  sys.load = Eigen::VectorXd::Zero(nv);
  sys.mean_row = Eigen::VectorXd::Zero(np);
  sys.pressure_integrals = Eigen::VectorXd::Zero(np);

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const ElementOperators op = build_element_operators(config, mesh.cell_polygon(cell),
                                                        cell_edge_reversed(mesh, cell));
    const LocalStokes blocks = build_local_stokes(op);
    const Eigen::VectorXd f_cell = local_load(op, load);
    const std::vector<int>& vel = sys.dofs.cell_velocity[cell];
    const int p0 = sys.dofs.cell_pressure_offset[cell];

    for (int i = 0; i < op.n_dofs; ++i) {
      sys.load(vel[i]) += f_cell(i);
      for (int j = 0; j < op.n_dofs; ++j)
        a_trip.emplace_back(vel[i], vel[j], blocks.A(i, j));
      for (int r = 0; r < per_cell; ++r)
        b_trip.emplace_back(p0 + r, vel[i], blocks.B(r, i));
    }
    sys.mean_row(p0) = mesh.cell_areas[cell];
    // int_P m_i = H(0, i): first row of the monomial Gram matrix
    sys.pressure_integrals.segment(p0, per_cell) =
        op.basis.H.row(0).head(per_cell).transpose();
  }

  sys.A.resize(nv, nv);
  sys.A.setFromTriplets(a_trip.begin(), a_trip.end());
  sys.B.resize(np, nv);
  sys.B.setFromTriplets(b_trip.begin(), b_trip.end());
  sys.boundary_values = interpolate(boundary, mesh, config, sys.dofs);
  return sys;
}

namespace {

struct Reduced {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd rhs;
  std::vector<int> interior;      // reduced index -> velocity DOF
  std::vector<int> reduced_index; // velocity DOF -> reduced index or -1
};

Reduced reduce(const AssembledSystem& sys) {
  const int nv = sys.dofs.n_velocity;
  const int np = sys.dofs.n_pressure;

  Reduced red;
  red.reduced_index.assign(nv, -1);
  for (int i = 0; i < nv; ++i) {
    if (sys.dofs.velocity_on_boundary[i]) continue;
    red.reduced_index[i] = static_cast<int>(red.interior.size());
    red.interior.push_back(i);
  }
  const int ni = static_cast<int>(red.interior.size());
  const int m = ni + np + 1;

  red.rhs = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < ni; ++i) red.rhs(i) = sys.load(red.interior[i]);

  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < nv; ++col) {
    const int jr = red.reduced_index[col];
    if (jr >= 0) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
        const int ir = red.reduced_index[static_cast<int>(it.row())];
        if (ir >= 0) trip.emplace_back(ir, jr, it.value());
      }
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, col); it; ++it) {
        trip.emplace_back(ni + static_cast<int>(it.row()), jr, it.value());
        trip.emplace_back(jr, ni + static_cast<int>(it.row()), it.value());
      }
    } else {
      const double g = sys.boundary_values(col);
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
        const int ir = red.reduced_index[static_cast<int>(it.row())];
        if (ir >= 0) red.rhs(ir) -= it.value() * g;
      }
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, col); it; ++it)
        red.rhs(ni + static_cast<int>(it.row())) -= it.value() * g;
    }
  }
  for (int r = 0; r < np; ++r) {
    if (sys.mean_row(r) == 0.0) continue;
    trip.emplace_back(m - 1, ni + r, sys.mean_row(r));
    trip.emplace_back(ni + r, m - 1, sys.mean_row(r));
  }
  red.K.resize(m, m);
  red.K.setFromTriplets(trip.begin(), trip.end());
  return red;
}

} // namespace

StokesSolution solve_system(const AssembledSystem& sys) {
  const Reduced red = reduce(sys);
  const int ni = static_cast<int>(red.interior.size());
  const int np = sys.dofs.n_pressure;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(red.K);
  if (lu.info() != Eigen::Success)
    throw SolveError("saddle-point factorization failed; the pairing may not be "
                     "inf-sup stable or the mesh is defective");
  Eigen::VectorXd z = lu.solve(red.rhs);
  // one step of iterative refinement; the saddle structure otherwise leaves
  // a few digits on the table at higher degree
  z += lu.solve(red.rhs - red.K * z);

  StokesSolution sol;
  sol.n_interior = ni;
  sol.residual = (red.K * z - red.rhs).norm() / (1.0 + red.rhs.norm());
  if (!(sol.residual <= 1e-10))
    throw SolveError("saddle-point solve residual " + std::to_string(sol.residual) +
                     " exceeds 1e-10; the pairing may not be inf-sup stable or the "
                     "mesh is defective");

  sol.velocity = sys.boundary_values;
  for (int i = 0; i < ni; ++i) sol.velocity(red.interior[i]) = z(i);
  // the assembled momentum equation carries +B^T p, i.e. the negative of the
  // physical pressure gradient pairing
  sol.pressure = -z.segment(ni, np);
  sol.multiplier = z(ni + np);

  // normalize to exact zero mean (the constraint row only weighs the
  // constant coefficients, which differs from the true mean for k >= 3)
  const double domain_area = sys.mean_row.sum();
  const double mean = sys.pressure_integrals.dot(sol.pressure) / domain_area;
  for (int r = 0; r < np; ++r)
    if (sys.mean_row(r) != 0.0) sol.pressure(r) -= mean;
  return sol;
}

StokesSolution solve_stokes(const PolyMesh& mesh, const SchemeConfig& config,
                            const VectorField& load, const VectorField& boundary) {
  return solve_system(assemble_system(mesh, config, load, boundary));
}

void dump_system(const AssembledSystem& sys, std::ostream& out) {
  const Reduced red = reduce(sys);
  char buf[64];
  out << "# reduced saddle-point system, " << red.K.rows() << " x " << red.K.cols()
      << ", nnz " << red.K.nonZeros() << "\n";
  for (int col = 0; col < red.K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(red.K, col); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << it.row() << " " << col << " " << buf << "\n";
    }
  }
  for (int i = 0; i < red.rhs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", red.rhs(i));
    out << "rhs " << i << " " << buf << "\n";
  }
}

InfSupReport infsup_estimate(const PolyMesh& mesh, const SchemeConfig& config,
                             int pressure_degree) {
  config.validate();
  const int k = config.degree;
  const int ell = pressure_degree < 0 ? k - 1 : pressure_degree;
  if (ell < k - 1 || ell > k + 1)
    throw Error("inf-sup pressure degree must lie in [k-1, k+1]");
  const int per_cell = poly_dim(ell);

  const DofMap dofs = build_dof_map(mesh, config);
  const int nv = dofs.n_velocity;
  const int np = mesh.n_cells() * per_cell;

  std::vector<int> interior, reduced_index(nv, -1);
  for (int i = 0; i < nv; ++i) {
    if (dofs.velocity_on_boundary[i]) continue;
    reduced_index[i] = static_cast<int>(interior.size());
    interior.push_back(i);
  }
  const int ni = static_cast<int>(interior.size());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ni, ni);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(np, ni);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(np, np); // block-diagonal pressure mass

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const ElementOperators op = build_element_operators(config, mesh.cell_polygon(cell),
                                                        cell_edge_reversed(mesh, cell));
    const LocalStokes blocks = build_local_stokes(op);
    // the scheme's divergence form stays at degree k-1 regardless of the
    // pressure space; enlarged pressures therefore meet a rank-deficient
    // coupling, which is exactly the spurious-mode mechanism the negative
    // control is meant to expose
    const Eigen::MatrixXd Bcell =
        (op.basis.H * op.basis.L.transpose()).topLeftCorner(per_cell, op.Nkm1) *
        op.Pdiv_km1;

    const std::vector<int>& vel = dofs.cell_velocity[cell];
    const int p0 = cell * per_cell;
    for (int i = 0; i < op.n_dofs; ++i) {
      const int ir = reduced_index[vel[i]];
      if (ir < 0) continue;
      for (int j = 0; j < op.n_dofs; ++j) {
        const int jr = reduced_index[vel[j]];
        if (jr >= 0) A(ir, jr) += blocks.A(i, j);
      }
      for (int r = 0; r < per_cell; ++r) B(p0 + r, ir) += Bcell(r, i);
    }
    M.block(p0, p0, per_cell, per_cell) =
        op.basis.H.topLeftCorner(per_cell, per_cell);
  }

  const Eigen::LLT<Eigen::MatrixXd> llt_a(0.5 * (A + A.transpose()));
  if (llt_a.info() != Eigen::Success)
    throw SolveError("interior stiffness is not positive definite");
  const Eigen::LLT<Eigen::MatrixXd> llt_m(M);
  if (llt_m.info() != Eigen::Success)
    throw SolveError("pressure mass matrix is not positive definite");

  // generalized singular values of B: svd of L_M^{-1} B L_A^{-T}
  const Eigen::MatrixXd X = llt_a.matrixL().solve(B.transpose()); // ni x np
  const Eigen::MatrixXd Z = llt_m.matrixL().solve(X.transpose()); // np x ni
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(Z);
  const Eigen::VectorXd sigma = svd.singularValues();

  InfSupReport report;
  report.n_interior = ni;
  report.n_pressure = np;
  report.sigma_min = sigma(sigma.size() - 1);
  report.beta = sigma.size() > 1 ? sigma(sigma.size() - 2) : sigma(0);
  return report;
}

} // namespace vem
