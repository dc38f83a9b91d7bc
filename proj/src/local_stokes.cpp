#include "vem/local_stokes.hpp"

namespace vem {

LocalStokes build_local_stokes(const ElementOperators& op) {
  const int n = op.n_dofs;

  LocalStokes blocks;
  blocks.Kc = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d)
      blocks.Kc.noalias() += op.Pgrad[c][d].transpose() * op.Pgrad[c][d];
  blocks.Kc = 0.5 * (blocks.Kc + blocks.Kc.transpose()).eval();

  const Eigen::MatrixXd residual =
      Eigen::MatrixXd::Identity(n, n) - op.D * op.pnabla_stacked();
  blocks.S = residual.transpose() * residual;
  blocks.S = 0.5 * (blocks.S + blocks.S.transpose()).eval();

  // Mean consistency energy per dimension of the reproduced space [P_k]^2;
  // averaging over the 2*Nk polynomial directions keeps the weight of the
  // complement comparable to the energy of the modes the projector captures,
  // independently of how many DOFs the element happens to carry.
  blocks.tau = blocks.Kc.trace() / (2.0 * op.Nk);
  blocks.A = blocks.Kc + blocks.tau * blocks.S;

  blocks.B = (op.basis.H * op.basis.L.transpose()).topLeftCorner(op.Nkm1, op.Nkm1) *
             op.Pdiv_km1;
  return blocks;
}

Eigen::VectorXd local_load(const ElementOperators& op, const VectorField& f) {
  const int kbar = op.config.rhs_degree();
  const int nbar = poly_dim(kbar);
  const QuadratureRule rule = polygon_rule(op.polygon, 2 * op.config.degree + 2);

  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(nbar, 2); // int_P f_c o_i
  for (int q = 0; q < rule.size(); ++q) {
    const VectorRd fq = f(rule.nodes[q]);
    const Eigen::VectorXd ov = op.basis.ortho_values(rule.nodes[q]).head(nbar);
    F.col(0) += rule.weights[q] * fq.x() * ov;
    F.col(1) += rule.weights[q] * fq.y() * ov;
  }

  Eigen::VectorXd load = Eigen::VectorXd::Zero(op.n_dofs);
  for (int c = 0; c < 2; ++c) load += op.p0(kbar, c).transpose() * F.col(c);
  return load;
}

StabilitySpectrum stability_diagnostic(const ElementOperators& op, const Eigen::MatrixXd& A) {
  const int n = op.n_dofs;

  Eigen::MatrixXd Kc = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d) Kc.noalias() += op.Pgrad[c][d].transpose() * op.Pgrad[c][d];
  const double tau = Kc.trace() / (2.0 * op.Nk);

  // reference energy: exact on range(D), tau-weighted on its complement
  const Eigen::HouseholderQR<Eigen::MatrixXd> dqr(op.D);
  const Eigen::MatrixXd Dortho =
      dqr.householderQ() * Eigen::MatrixXd::Identity(n, op.D.cols());
  const Eigen::MatrixXd reference =
      Kc + tau * (Eigen::MatrixXd::Identity(n, n) - Dortho * Dortho.transpose());

  // restrict both forms to the complement of the constant fields
  Eigen::MatrixXd constants(n, 2);
  constants.col(0) = op.D.col(0);
  constants.col(1) = op.D.col(op.Nk);
  const Eigen::MatrixXd Q = Eigen::FullPivHouseholderQR<Eigen::MatrixXd>(constants)
                                .matrixQ()
                                .rightCols(n - 2);

  const Eigen::MatrixXd Ared = Q.transpose() * A * Q;
  const Eigen::MatrixXd Nred = Q.transpose() * reference * Q;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (Ared + Ared.transpose()), 0.5 * (Nred + Nred.transpose()));

  StabilitySpectrum spectrum;
  spectrum.alpha_low = eig.eigenvalues().minCoeff();
  spectrum.alpha_high = eig.eigenvalues().maxCoeff();
  return spectrum;
}

} // namespace vem
