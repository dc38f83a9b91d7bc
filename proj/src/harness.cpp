#include "vem/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "vem/errors.hpp"
#include "vem/quadrature.hpp"

namespace vem {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

} // namespace

FlowCase manufactured_case() {
  const double shift = (std::exp(1.0) - 1.0) * (std::exp(1.0) - 1.0); // mean of e^{x+y}
  FlowCase flow;
  flow.velocity = [](const VectorRd& q) {
    return VectorRd(std::cos(kTwoPi * q.x()) * std::sin(kTwoPi * q.y()),
                    -std::sin(kTwoPi * q.x()) * std::cos(kTwoPi * q.y()));
  };
  flow.velocity_gradient = [](const VectorRd& q) {
    const double cx = std::cos(kTwoPi * q.x()), sx = std::sin(kTwoPi * q.x());
    const double cy = std::cos(kTwoPi * q.y()), sy = std::sin(kTwoPi * q.y());
    Eigen::Matrix2d g;
    g << -kTwoPi * sx * sy, kTwoPi * cx * cy, //
        -kTwoPi * cx * cy, kTwoPi * sx * sy;
    return g;
  };
  flow.pressure = [shift](const VectorRd& q) { return std::exp(q.x() + q.y()) - shift; };
  flow.load = [](const VectorRd& q) {
    const double e = std::exp(q.x() + q.y());
    const double w = 2.0 * kTwoPi * kTwoPi; // 8 pi^2
    return VectorRd(w * std::cos(kTwoPi * q.x()) * std::sin(kTwoPi * q.y()) + e,
                    -w * std::sin(kTwoPi * q.x()) * std::cos(kTwoPi * q.y()) + e);
  };
  return flow;
}

FlowCase polynomial_case(int degree) {
  FlowCase flow;
  switch (degree) {
  case 1:
    // Any linear divergence-free u; p must be the zero constant, so f = 0.
    flow.velocity = [](const VectorRd& q) {
      return VectorRd(q.x() - 2.0 * q.y(), -2.0 * q.x() - q.y());
    };
    flow.velocity_gradient = [](const VectorRd&) {
      Eigen::Matrix2d g;
      g << 1.0, -2.0, -2.0, -1.0;
      return g;
    };
    flow.pressure = [](const VectorRd&) { return 0.0; };
    flow.load = [](const VectorRd&) { return VectorRd(0.0, 0.0); };
    return flow;
  case 2:
    flow.velocity = [](const VectorRd& q) {
      const double x = q.x(), y = q.y();
      return VectorRd(-x * x + 3.0 * y * y, -3.0 * x * x + 2.0 * x * y);
    };
    flow.velocity_gradient = [](const VectorRd& q) {
      const double x = q.x(), y = q.y();
      Eigen::Matrix2d g;
      g << -2.0 * x, 6.0 * y, -6.0 * x + 2.0 * y, 2.0 * x;
      return g;
    };
    flow.pressure = [](const VectorRd& q) { return q.x() + q.y() - 1.0; };
    flow.load = [](const VectorRd&) { return VectorRd(-3.0, 7.0); };
    return flow;
  case 3:
    flow.velocity = [](const VectorRd& q) {
      const double x = q.x(), y = q.y();
      return VectorRd(2.0 * x * x * y - 4.0 * y * y * y, -4.0 * x * x * x - 2.0 * x * y * y);
    };
    flow.velocity_gradient = [](const VectorRd& q) {
      const double x = q.x(), y = q.y();
      Eigen::Matrix2d g;
      g << 4.0 * x * y, 2.0 * x * x - 12.0 * y * y, //
          -12.0 * x * x - 2.0 * y * y, -4.0 * x * y;
      return g;
    };
    flow.pressure = [](const VectorRd& q) {
      return q.x() * q.y() + q.x() * q.x() - 7.0 / 12.0;
    };
    flow.load = [](const VectorRd& q) {
      return VectorRd(2.0 * q.x() + 21.0 * q.y(), 29.0 * q.x());
    };
    return flow;
  default:
    throw Error("polynomial_case: degree must be 1, 2 or 3, got " + std::to_string(degree));
  }
}

RunResult run_case(const PolyMesh& mesh, const SchemeConfig& config, const FlowCase& flow) {
  config.validate();
  const AssembledSystem sys = assemble_system(mesh, config, flow.load, flow.velocity);
  const StokesSolution sol = solve_system(sys);
  const DofMap& dofs = sys.dofs;
  const int k = config.degree;

  double num_h1 = 0.0, den_h1 = 0.0;
  double num_l2u = 0.0, den_l2u = 0.0;
  double num_l2p = 0.0, den_l2p = 0.0;
  double div_sq[3] = {0.0, 0.0, 0.0};

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const ElementOperators op = build_element_operators(config, mesh.cell_polygon(cell),
                                                        cell_edge_reversed(mesh, cell));
    Eigen::VectorXd d(op.n_dofs);
    for (int l = 0; l < op.n_dofs; ++l) d(l) = sol.velocity(dofs.cell_velocity[cell][l]);
    const Eigen::VectorXd ph =
        sol.pressure.segment(dofs.cell_pressure_offset[cell], dofs.pressure_per_cell);

    div_sq[0] += (op.Pdiv_km1 * d).squaredNorm();
    div_sq[1] += (op.Pdiv_k * d).squaredNorm();
    div_sq[2] += (op.Pdiv_kp1 * d).squaredNorm();

    // Monomial coefficients of P0_k u_h per component, padded to degree k+1
    // so the coefficient-space derivative maps apply directly.
    const Eigen::MatrixXd Lk = op.basis.L.topLeftCorner(op.Nk, op.Nk);
    std::array<Eigen::VectorXd, 2> coeff, coeff_dx, coeff_dy;
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd pad = Eigen::VectorXd::Zero(op.Nkp1);
      pad.head(op.Nk) = Lk.transpose() * (op.p0(k, c) * d);
      coeff[c] = pad;
      coeff_dx[c] = op.basis.Dx * pad;
      coeff_dy[c] = op.basis.Dy * pad;
    }

    const QuadratureRule rule = polygon_rule(op.polygon, 2 * k + 4);
    for (int q = 0; q < rule.size(); ++q) {
      const VectorRd& x = rule.nodes[q];
      const double w = rule.weights[q];
      const Eigen::VectorXd mono = op.basis.mono.values(x);

      const VectorRd ue = flow.velocity(x);
      const VectorRd uh(coeff[0].dot(mono), coeff[1].dot(mono));
      num_l2u += w * (ue - uh).squaredNorm();
      den_l2u += w * ue.squaredNorm();

      const Eigen::Matrix2d ge = flow.velocity_gradient(x);
      Eigen::Matrix2d gh;
      gh << coeff_dx[0].dot(mono), coeff_dy[0].dot(mono), //
          coeff_dx[1].dot(mono), coeff_dy[1].dot(mono);
      num_h1 += w * (ge - gh).squaredNorm();
      den_h1 += w * ge.squaredNorm();

      const double pe = flow.pressure(x);
      const double phv = ph.dot(mono.head(op.Nkm1));
      num_l2p += w * (pe - phv) * (pe - phv);
      den_l2p += w * pe * pe;
    }
  }

  const auto relative = [](double num, double den) {
    const double scale = std::sqrt(den);
    return std::sqrt(num) / (scale > 0.0 ? scale : 1.0);
  };
  RunResult result;
  result.h = mesh_diameter(mesh);
  result.n_dof_velocity = dofs.n_velocity;
  result.n_dof_pressure = dofs.n_pressure;
  result.err_h1_u = relative(num_h1, den_h1);
  result.err_l2_u = relative(num_l2u, den_l2u);
  result.err_l2_p = relative(num_l2p, den_l2p);
  result.div_km1 = std::sqrt(div_sq[0]);
  result.div_k = std::sqrt(div_sq[1]);
  result.div_kp1 = std::sqrt(div_sq[2]);
  return result;
}

const char* const kCsvHeader = "family,level,h,k,formulation,enhanced,n_dof_vel,n_dof_p,"
                               "err_h1_u,err_l2_u,err_l2_p,div_km1,div_k,div_kp1,"
                               "rate_h1,rate_l2_u,rate_l2_p,status";

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Keep the CSV parseable: the status column never contains commas/newlines.
std::string sanitize_status(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

double observed_rate(double err_prev, double err_this, double h_prev, double h_this) {
  if (!(err_prev > 0.0) || !(err_this > 0.0) || !(h_prev > h_this)) return std::nan("");
  return std::log(err_prev / err_this) / std::log(h_prev / h_this);
}

void write_row(std::ostream& csv, const StudyRow& row) {
  csv << family_name(row.family) << ',' << row.level << ',';
  const bool ok = row.ok();
  if (ok) csv << format_double(row.result.h);
  csv << ',' << row.degree << ',' << formulation_name(row.formulation) << ','
      << (row.enhanced ? 1 : 0) << ',';
  if (ok) csv << row.result.n_dof_velocity;
  csv << ',';
  if (ok) csv << row.result.n_dof_pressure;
  csv << ',';
  if (ok) {
    csv << format_double(row.result.err_h1_u) << ',' << format_double(row.result.err_l2_u)
        << ',' << format_double(row.result.err_l2_p) << ','
        << format_double(row.result.div_km1) << ',' << format_double(row.result.div_k) << ','
        << format_double(row.result.div_kp1) << ',';
  } else {
    csv << ",,,,,,";
  }
  if (std::isfinite(row.rate_h1)) csv << format_double(row.rate_h1);
  csv << ',';
  if (std::isfinite(row.rate_l2_u)) csv << format_double(row.rate_l2_u);
  csv << ',';
  if (std::isfinite(row.rate_l2_p)) csv << format_double(row.rate_l2_p);
  csv << ',' << row.status << '\n';
}

} // namespace

ConvergenceReport run_study(const StudyGrid& grid, const CaseFactory& make_case,
                            std::ostream& csv) {
  if (grid.level_min < 1 || grid.level_max > 5 || grid.level_min > grid.level_max)
    throw Error("run_study: levels must satisfy 1 <= min <= max <= 5");
  for (const int k : grid.degrees)
    if (k < 1) throw Error("run_study: polynomial degree must be >= 1");

  csv << kCsvHeader << '\n';
  ConvergenceReport report;
  std::map<std::pair<int, int>, PolyMesh> mesh_cache;

  const auto mesh_for = [&](MeshFamily family, int level) -> const PolyMesh& {
    const std::pair<int, int> key{static_cast<int>(family), level};
    auto it = mesh_cache.find(key);
    if (it == mesh_cache.end()) {
      it = mesh_cache.emplace(key, generate_mesh(family, level, grid.seed)).first;
      if (!grid.mesh_dir.empty())
        write_mesh_file(it->second, grid.mesh_dir + "/" + family_name(family) + "_level" +
                                        std::to_string(level) + ".txt");
    }
    return it->second;
  };

  for (const MeshFamily family : grid.families) {
    for (const Formulation formulation : grid.formulations) {
      for (const bool enhanced : grid.variants) {
        for (const int k : grid.degrees) {
          RunResult prev;
          bool has_prev = false;
          for (int level = grid.level_min; level <= grid.level_max; ++level) {
            StudyRow row;
            row.family = family;
            row.level = level;
            row.degree = k;
            row.formulation = formulation;
            row.enhanced = enhanced;
            row.rate_h1 = row.rate_l2_u = row.rate_l2_p = std::nan("");
            try {
              const PolyMesh& mesh = mesh_for(family, level);
              const SchemeConfig config{formulation, k, enhanced};
              row.result = run_case(mesh, config, make_case(k));
              row.status = "ok";
              if (has_prev) {
                const RunResult& a = prev;
                const RunResult& b = row.result;
                row.rate_h1 = observed_rate(a.err_h1_u, b.err_h1_u, a.h, b.h);
                row.rate_l2_u = observed_rate(a.err_l2_u, b.err_l2_u, a.h, b.h);
                row.rate_l2_p = observed_rate(a.err_l2_p, b.err_l2_p, a.h, b.h);
              }
            } catch (const Error& e) {
              row.status = sanitize_status(e.what());
            }
            write_row(csv, row);
            report.rows.push_back(row);
            has_prev = row.ok();
            if (has_prev) prev = row.result;
          }
        }
      }
    }
  }
  return report;
}

ConvergenceReport run_study(const StudyGrid& grid, const FlowCase& flow, std::ostream& csv) {
  return run_study(grid, [&flow](int) { return flow; }, csv);
}

ConvergenceReport run_study_file(const StudyGrid& grid, const CaseFactory& make_case,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("run_study: cannot open '" + path + "' for writing");
  const ConvergenceReport report = run_study(grid, make_case, out);
  out.flush();
  if (!out) throw IoError("run_study: write to '" + path + "' failed");
  return report;
}

double least_squares_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  if (hs.size() != errs.size())
    throw Error("least_squares_slope: mismatched sample sizes");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0) || !(errs[i] > 0.0)) continue;
    if (!std::isfinite(hs[i]) || !std::isfinite(errs[i])) continue;
    x.push_back(std::log(hs[i]));
    y.push_back(std::log(errs[i]));
  }
  const std::size_t n = x.size();
  if (n < 2) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nan("");
  return sxy / sxx;
}

} // namespace vem
