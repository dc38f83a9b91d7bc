#include "vem/spaces.hpp"

#include <algorithm>
#include <cctype>

namespace vem {

namespace {

// int_{-1/2}^{1/2} s^l ds
double sigma_moment(int l) {
  if (l % 2 == 1) return 0.0;
  return 1.0 / ((l + 1) * (1 << l));
}

// Inverse of the universal interpolation system for a degree-d edge trace in
// sigma-monomial coordinates. Data ordering: value at sigma=-1/2, value at
// sigma=+1/2, then the normalized moments against 1, sigma, ..., sigma^(d-2).
// The matrix is dimensionless and depends only on d.
Eigen::MatrixXd trace_interpolation_inverse(int d) {
  const int n = d + 1;
  Eigen::MatrixXd U(n, n);
  for (int i = 0; i < n; ++i) {
    U(0, i) = std::pow(-0.5, i);
    U(1, i) = std::pow(0.5, i);
  }
  for (int j = 0; j + 2 < n; ++j)
    for (int i = 0; i < n; ++i) U(2 + j, i) = sigma_moment(i + j);
  return U.inverse();
}

int quadrature_degree(int k) { return 2 * k + 2; }

} // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

Formulation parse_formulation(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "f1") return Formulation::F1;
  if (s == "f2") return Formulation::F2;
  throw Error("unknown formulation '" + name + "' (expected f1 or f2)");
}

std::string formulation_name(Formulation formulation) {
  return formulation == Formulation::F1 ? "f1" : "f2";
}

void SchemeConfig::validate() const {
  if (degree < 1) throw Error("scheme degree must be >= 1, got " + std::to_string(degree));
}

int pressure_dofs_per_cell(const SchemeConfig& config) {
  return poly_dim(config.degree - 1);
}

int velocity_dofs_in_cell(const SchemeConfig& config, int n_edges) {
  return VelocityLayout(config, n_edges).size();
}

// ---------------------------------------------------------------------------
// Local layout
// ---------------------------------------------------------------------------

VelocityLayout::VelocityLayout(const SchemeConfig& config, int n_edges)
    : m_form(config.formulation), m_k(config.degree), m_ne(n_edges),
      m_nkm2(poly_dim(config.degree - 2)) {
  if (m_form == Formulation::F1)
    m_size = 2 * (m_ne * (1 + m_k) + m_nkm2);
  else
    m_size = (2 * m_k + 1) * m_ne + 2 * m_nkm2;
}

int VelocityLayout::vertex(int v, int comp) const {
  if (m_form == Formulation::F1) return comp * (m_ne * (1 + m_k) + m_nkm2) + v;
  return 2 * v + comp;
}

int VelocityLayout::edge_f1(int e, int comp, int j) const {
  return comp * (m_ne * (1 + m_k) + m_nkm2) + m_ne + e * m_k + j;
}

int VelocityLayout::edge_normal(int e, int j) const { return 2 * m_ne + e * m_k + j; }

int VelocityLayout::edge_tangent(int e, int j) const {
  return 2 * m_ne + m_k * m_ne + e * (m_k - 1) + j;
}

int VelocityLayout::cell_moment(int comp, int beta) const {
  if (m_form == Formulation::F1)
    return comp * (m_ne * (1 + m_k) + m_nkm2) + m_ne * (1 + m_k) + beta;
  return (2 * m_k + 1) * m_ne + comp * m_nkm2 + beta;
}

// ---------------------------------------------------------------------------
// Element operators
// ---------------------------------------------------------------------------

Eigen::MatrixXd ElementOperators::pnabla_stacked() const {
  Eigen::MatrixXd stacked(2 * Nk, n_dofs);
  stacked.topRows(Nk) = Pnabla[0];
  stacked.bottomRows(Nk) = Pnabla[1];
  return stacked;
}

ElementOperators build_element_operators(const SchemeConfig& config, const Polygon& polygon,
                                         const std::vector<bool>& edge_reversed) {
  config.validate();
  const int k = config.degree;
  const int ne = static_cast<int>(polygon.size());
  if (!edge_reversed.empty() && static_cast<int>(edge_reversed.size()) != ne)
    throw Error("edge_reversed size does not match the polygon");

  ElementOperators op{config,
                      polygon,
                      make_element_basis(polygon, k + 1, quadrature_degree(k)),
                      VelocityLayout(config, ne)};

  op.Nkm2 = poly_dim(k - 2);
  op.Nkm1 = poly_dim(k - 1);
  op.Nk = poly_dim(k);
  op.Nkp1 = poly_dim(k + 1);
  op.n_dofs = op.layout.size();
  const int n = op.n_dofs;
  const double area = polygon_signed_area(polygon);

  // --- edge frames -------------------------------------------------------
  op.edges.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const bool rev = !edge_reversed.empty() && edge_reversed[e];
    const VectorRd& p = polygon[e];
    const VectorRd& q = polygon[(e + 1) % ne];
    ElementOperators::EdgeFrame& fr = op.edges[e];
    fr.lo = rev ? q : p;
    fr.hi = rev ? p : q;
    fr.length = (fr.hi - fr.lo).norm();
    fr.tangent = (fr.hi - fr.lo) / fr.length;
    fr.normal = rot90ccw(fr.tangent);
    fr.sign = rev ? +1 : -1;
  }

  // --- per-edge integrals int_E m_b sigma^j ds ---------------------------
  // (the quadrature degree covers deg m_b + deg sigma^j = 2k+2 exactly)
  std::vector<Eigen::MatrixXd> edge_ints(ne);
  for (int e = 0; e < ne; ++e) {
    const auto& fr = op.edges[e];
    const EdgeMonomials em(fr.lo, fr.hi, k + 1);
    const QuadratureRule rule = segment_rule(fr.lo, fr.hi, quadrature_degree(k));
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(op.Nkp1, k + 2);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd mvals = op.basis.mono.values(rule.nodes[q]);
      const Eigen::VectorXd svals = em.values(em.coordinate(rule.nodes[q]));
      E.noalias() += rule.weights[q] * mvals * svals.transpose();
    }
    edge_ints[e] = std::move(E);
  }

  // --- trace maps ---------------------------------------------------------
  const Eigen::MatrixXd Un_inv = trace_interpolation_inverse(k + 1);
  const Eigen::MatrixXd Ut_inv =
      config.formulation == Formulation::F2 ? trace_interpolation_inverse(k)
                                            : Eigen::MatrixXd();

  op.trace[0].resize(ne);
  op.trace[1].resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto& fr = op.edges[e];
    const bool rev = fr.sign > 0;
    const int lo_pos = rev ? (e + 1) % ne : e;
    const int hi_pos = rev ? e : (e + 1) % ne;

    if (config.formulation == Formulation::F1) {
      for (int c = 0; c < 2; ++c) {
        Eigen::MatrixXd data = Eigen::MatrixXd::Zero(k + 2, n);
        data(0, op.layout.vertex(lo_pos, c)) = 1.0;
        data(1, op.layout.vertex(hi_pos, c)) = 1.0;
        for (int j = 0; j < k; ++j) data(2 + j, op.layout.edge_f1(e, c, j)) = 1.0;
        op.trace[c][e] = Un_inv * data;
      }
    } else {
      Eigen::MatrixXd ndata = Eigen::MatrixXd::Zero(k + 2, n);
      ndata(0, op.layout.vertex(lo_pos, 0)) = fr.normal.x();
      ndata(0, op.layout.vertex(lo_pos, 1)) = fr.normal.y();
      ndata(1, op.layout.vertex(hi_pos, 0)) = fr.normal.x();
      ndata(1, op.layout.vertex(hi_pos, 1)) = fr.normal.y();
      for (int j = 0; j < k; ++j) ndata(2 + j, op.layout.edge_normal(e, j)) = 1.0;
      const Eigen::MatrixXd coef_n = Un_inv * ndata;

      Eigen::MatrixXd tdata = Eigen::MatrixXd::Zero(k + 1, n);
      tdata(0, op.layout.vertex(lo_pos, 0)) = fr.tangent.x();
      tdata(0, op.layout.vertex(lo_pos, 1)) = fr.tangent.y();
      tdata(1, op.layout.vertex(hi_pos, 0)) = fr.tangent.x();
      tdata(1, op.layout.vertex(hi_pos, 1)) = fr.tangent.y();
      for (int j = 0; j + 1 < k; ++j) tdata(2 + j, op.layout.edge_tangent(e, j)) = 1.0;
      Eigen::MatrixXd coef_t = Eigen::MatrixXd::Zero(k + 2, n);
      coef_t.topRows(k + 1) = Ut_inv * tdata;

      op.trace[0][e] = fr.normal.x() * coef_n + fr.tangent.x() * coef_t;
      op.trace[1][e] = fr.normal.y() * coef_n + fr.tangent.y() * coef_t;
    }
  }

  const Eigen::MatrixXd& L = op.basis.L;
  const Eigen::MatrixXd& H = op.basis.H;
  const Eigen::MatrixXd& Dx = op.basis.Dx;
  const Eigen::MatrixXd& Dy = op.basis.Dy;

  // --- exact cell-moment rows of the moment matrices ----------------------
  for (int c = 0; c < 2; ++c) {
    op.moments[c] = Eigen::MatrixXd::Zero(op.Nk, n);
    for (int i = 0; i < op.Nkm2; ++i)
      for (int beta = 0; beta <= i; ++beta)
        op.moments[c](i, op.layout.cell_moment(c, beta)) = area * L(i, beta);
  }

  // --- elliptic projector --------------------------------------------------
  const Eigen::MatrixXd Lk = L.topLeftCorner(op.Nk, op.Nk);
  const Eigen::MatrixXd Hk = H.topLeftCorner(op.Nk, op.Nk);
  const Eigen::MatrixXd Dxk = Dx.topLeftCorner(op.Nk, op.Nk);
  const Eigen::MatrixXd Dyk = Dy.topLeftCorner(op.Nk, op.Nk);

  Eigen::MatrixXd G = Lk *
                      (Dxk.transpose() * Hk * Dxk + Dyk.transpose() * Hk * Dyk) *
                      Lk.transpose();
  // the gradient pairing annihilates constants; the first row is replaced by
  // the boundary-mean closure int_dP (v - proj) ds = 0
  Eigen::VectorXd closure = Eigen::VectorXd::Zero(op.Nk);
  for (int e = 0; e < ne; ++e) closure += Lk * edge_ints[e].col(0).head(op.Nk);
  G.row(0) = closure.transpose();

  const Eigen::FullPivLU<Eigen::MatrixXd> glu(G);
  if (!glu.isInvertible())
    throw ConditioningError("elliptic projector system is singular on this element");

  Eigen::RowVectorXd edge_sigma_moments(k + 2);
  for (int j = 0; j < k + 2; ++j) edge_sigma_moments(j) = sigma_moment(j);

  for (int c = 0; c < 2; ++c) {
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(op.Nk, n);
    for (int e = 0; e < ne; ++e)
      rhs.row(0) += op.edges[e].length * edge_sigma_moments * op.trace[c][e];

    for (int i = 1; i < op.Nk; ++i) {
      const Eigen::VectorXd li = Lk.row(i).transpose();
      const Eigen::VectorXd lap = Dxk * (Dxk * li) + Dyk * (Dyk * li);
      for (int beta = 0; beta < op.Nkm2; ++beta)
        rhs(i, op.layout.cell_moment(c, beta)) -= area * lap(beta);

      Eigen::VectorXd li_full = Eigen::VectorXd::Zero(op.Nkp1);
      li_full.head(op.Nk) = li;
      const Eigen::VectorXd gx = Dx * li_full;
      const Eigen::VectorXd gy = Dy * li_full;
      for (int e = 0; e < ne; ++e) {
        const VectorRd n_out = op.edges[e].sign * op.edges[e].normal;
        rhs.row(i) += (n_out.x() * gx + n_out.y() * gy).transpose() * edge_ints[e] *
                      op.trace[c][e];
      }
    }
    op.Pnabla[c] = glu.solve(rhs);
  }

  // moments of degree k-1 and k are not DOFs; substitute those of the
  // elliptic projection (exact on the enhanced space)
  for (int c = 0; c < 2; ++c)
    op.moments[c].bottomRows(op.Nk - op.Nkm2) = op.Pnabla[c].bottomRows(op.Nk - op.Nkm2);

  // --- gradient projections (exact by integration by parts) ---------------
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 2; ++d) {
      const Eigen::MatrixXd& Dd = d == 0 ? Dx : Dy;
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(op.Nkm1, n);
      for (int i = 0; i < op.Nkm1; ++i) {
        Eigen::VectorXd li_full = Eigen::VectorXd::Zero(op.Nkp1);
        li_full.head(i + 1) = L.row(i).head(i + 1);
        const Eigen::VectorXd dcoef = Dd * li_full;
        for (int beta = 0; beta < op.Nkm2; ++beta)
          P(i, op.layout.cell_moment(c, beta)) -= area * dcoef(beta);
        for (int e = 0; e < ne; ++e) {
          const double n_out_d = op.edges[e].sign * op.edges[e].normal(d);
          P.row(i) += n_out_d * li_full.transpose() * edge_ints[e] * op.trace[c][e];
        }
      }
      op.Pgrad[c][d] = P;
    }
  }

  // --- divergence projections ----------------------------------------------
  const Eigen::MatrixXd LHk = (L * H).topLeftCorner(op.Nk, op.Nk);
  auto pdiv = [&](int ell) {
    const int nl = poly_dim(ell);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nl, n);
    for (int i = 0; i < nl; ++i) {
      Eigen::VectorXd li_full = Eigen::VectorXd::Zero(op.Nkp1);
      li_full.head(i + 1) = L.row(i).head(i + 1);
      for (int c = 0; c < 2; ++c) {
        const Eigen::VectorXd dmono = (c == 0 ? Dx : Dy) * li_full; // degree <= k
        const Eigen::VectorXd gamma = LHk * dmono.head(op.Nk);
        P.row(i) -= gamma.transpose() * op.moments[c];
        for (int e = 0; e < ne; ++e) {
          const double n_out_c = op.edges[e].sign * op.edges[e].normal(c);
          P.row(i) += n_out_c * li_full.transpose() * edge_ints[e] * op.trace[c][e];
        }
      }
    }
    return P;
  };
  op.Pdiv_km1 = pdiv(k - 1);
  op.Pdiv_k = pdiv(k);
  op.Pdiv_kp1 = pdiv(k + 1);

  // --- DOFs of the orthonormal polynomial fields --------------------------
  op.D = Eigen::MatrixXd::Zero(n, 2 * op.Nk);
  for (int v = 0; v < ne; ++v) {
    const Eigen::VectorXd ov = op.basis.ortho_values(polygon[v]);
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < op.Nk; ++i) op.D(op.layout.vertex(v, c), c * op.Nk + i) = ov(i);
  }
  for (int e = 0; e < ne; ++e) {
    const auto& fr = op.edges[e];
    // O(i, j) = int_E o_i sigma^j ds
    const Eigen::MatrixXd O = L.topRows(op.Nk) * edge_ints[e];
    if (config.formulation == Formulation::F1) {
      for (int c = 0; c < 2; ++c)
        for (int j = 0; j < k; ++j)
          for (int i = 0; i < op.Nk; ++i)
            op.D(op.layout.edge_f1(e, c, j), c * op.Nk + i) = O(i, j) / fr.length;
    } else {
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < op.Nk; ++i) {
          for (int j = 0; j < k; ++j)
            op.D(op.layout.edge_normal(e, j), c * op.Nk + i) =
                fr.normal(c) * O(i, j) / fr.length;
          for (int j = 0; j + 1 < k; ++j)
            op.D(op.layout.edge_tangent(e, j), c * op.Nk + i) +=
                fr.tangent(c) * O(i, j) / fr.length;
        }
      }
    }
  }
  const Eigen::MatrixXd LHm = (L * H).topLeftCorner(op.Nk, op.Nkm2);
  for (int c = 0; c < 2; ++c)
    for (int beta = 0; beta < op.Nkm2; ++beta)
      for (int i = 0; i < op.Nk; ++i)
        op.D(op.layout.cell_moment(c, beta), c * op.Nk + i) = LHm(i, beta) / area;

  return op;
}

// ---------------------------------------------------------------------------
// Global DOF map
// ---------------------------------------------------------------------------

std::vector<bool> cell_edge_reversed(const PolyMesh& mesh, int cell) {
  const auto& cycle = mesh.cells[cell];
  const int m = static_cast<int>(cycle.size());
  std::vector<bool> reversed(m);
  for (int i = 0; i < m; ++i) reversed[i] = cycle[i] > cycle[(i + 1) % m];
  return reversed;
}

DofMap build_dof_map(const PolyMesh& mesh, const SchemeConfig& config) {
  config.validate();
  const int k = config.degree;
  const int nkm2 = poly_dim(k - 2);
  const int nv = mesh.n_vertices();
  const int nedges = mesh.n_edges();
  const int ncells = mesh.n_cells();

  DofMap map;
  map.config = config;
  map.pressure_per_cell = pressure_dofs_per_cell(config);
  map.n_pressure = ncells * map.pressure_per_cell;
  map.cell_pressure_offset.resize(ncells);
  for (int c = 0; c < ncells; ++c) map.cell_pressure_offset[c] = c * map.pressure_per_cell;

  const bool f1 = config.formulation == Formulation::F1;
  const int scalar_block = nv + k * nedges + ncells * nkm2; // F1 only

  auto vertex_dof = [&](int v, int comp) {
    return f1 ? comp * scalar_block + v : 2 * v + comp;
  };
  auto edge_f1_dof = [&](int e, int comp, int j) {
    return comp * scalar_block + nv + e * k + j;
  };
  auto edge_normal_dof = [&](int e, int j) { return 2 * nv + e * k + j; };
  auto edge_tangent_dof = [&](int e, int j) {
    return 2 * nv + k * nedges + e * (k - 1) + j;
  };
  auto cell_dof = [&](int c, int comp, int beta) {
    if (f1) return comp * scalar_block + nv + k * nedges + c * nkm2 + beta;
    return 2 * nv + (2 * k - 1) * nedges + c * 2 * nkm2 + comp * nkm2 + beta;
  };

  map.n_velocity = f1 ? 2 * scalar_block : 2 * nv + (2 * k - 1) * nedges + 2 * ncells * nkm2;

  map.cell_velocity.resize(ncells);
  for (int c = 0; c < ncells; ++c) {
    const auto& cycle = mesh.cells[c];
    const auto& cedges = mesh.cell_edges[c];
    const int m = static_cast<int>(cycle.size());
    std::vector<int>& dofs = map.cell_velocity[c];
    dofs.reserve(velocity_dofs_in_cell(config, m));
    if (f1) {
      for (int comp = 0; comp < 2; ++comp) {
        for (int i = 0; i < m; ++i) dofs.push_back(vertex_dof(cycle[i], comp));
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < k; ++j) dofs.push_back(edge_f1_dof(cedges[i], comp, j));
        for (int beta = 0; beta < nkm2; ++beta) dofs.push_back(cell_dof(c, comp, beta));
      }
    } else {
      for (int i = 0; i < m; ++i) {
        dofs.push_back(vertex_dof(cycle[i], 0));
        dofs.push_back(vertex_dof(cycle[i], 1));
      }
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) dofs.push_back(edge_normal_dof(cedges[i], j));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j + 1 < k; ++j) dofs.push_back(edge_tangent_dof(cedges[i], j));
      for (int comp = 0; comp < 2; ++comp)
        for (int beta = 0; beta < nkm2; ++beta) dofs.push_back(cell_dof(c, comp, beta));
    }
  }

  map.velocity_on_boundary.assign(map.n_velocity, false);
  for (int v = 0; v < nv; ++v) {
    if (!mesh.vertex_on_boundary[v]) continue;
    map.velocity_on_boundary[vertex_dof(v, 0)] = true;
    map.velocity_on_boundary[vertex_dof(v, 1)] = true;
  }
  for (int e = 0; e < nedges; ++e) {
    if (!mesh.edge_on_boundary[e]) continue;
    if (f1) {
      for (int comp = 0; comp < 2; ++comp)
        for (int j = 0; j < k; ++j)
          map.velocity_on_boundary[edge_f1_dof(e, comp, j)] = true;
    } else {
      for (int j = 0; j < k; ++j) map.velocity_on_boundary[edge_normal_dof(e, j)] = true;
      for (int j = 0; j + 1 < k; ++j)
        map.velocity_on_boundary[edge_tangent_dof(e, j)] = true;
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

Eigen::VectorXd interpolate(const VectorField& u, const PolyMesh& mesh,
                            const SchemeConfig& config, const DofMap& dofs) {
  config.validate();
  const int k = config.degree;
  const int nkm2 = poly_dim(k - 2);
  const int quad_deg = 2 * k + 6; // well beyond the scheme's accuracy

  Eigen::VectorXd result = Eigen::VectorXd::Zero(dofs.n_velocity);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Polygon poly = mesh.cell_polygon(c);
    const int m = static_cast<int>(poly.size());
    const VelocityLayout layout(config, m);
    const auto& global = dofs.cell_velocity[c];
    const auto reversed = cell_edge_reversed(mesh, c);

    Eigen::VectorXd local = Eigen::VectorXd::Zero(layout.size());
    for (int i = 0; i < m; ++i) {
      const VectorRd uv = u(poly[i]);
      local(layout.vertex(i, 0)) = uv.x();
      local(layout.vertex(i, 1)) = uv.y();
    }

    for (int e = 0; e < m; ++e) {
      const VectorRd lo = reversed[e] ? poly[(e + 1) % m] : poly[e];
      const VectorRd hi = reversed[e] ? poly[e] : poly[(e + 1) % m];
      const EdgeMonomials em(lo, hi, k + 1);
      const QuadratureRule rule = segment_rule(lo, hi, quad_deg);
      const VectorRd normal = rot90ccw((hi - lo).normalized());
      const VectorRd tangent = (hi - lo).normalized();
      for (int q = 0; q < rule.size(); ++q) {
        const VectorRd uq = u(rule.nodes[q]);
        const double w = rule.weights[q] / em.length();
        const double s = em.coordinate(rule.nodes[q]);
        double spow = 1.0;
        for (int j = 0; j < k; ++j) {
          if (config.formulation == Formulation::F1) {
            local(layout.edge_f1(e, 0, j)) += w * spow * uq.x();
            local(layout.edge_f1(e, 1, j)) += w * spow * uq.y();
          } else {
            local(layout.edge_normal(e, j)) += w * spow * uq.dot(normal);
            if (j + 1 < k) local(layout.edge_tangent(e, j)) += w * spow * uq.dot(tangent);
          }
          spow *= s;
        }
      }
    }

    if (nkm2 > 0) {
      const ScaledMonomials mono(polygon_centroid(poly), polygon_diameter(poly), k - 2);
      const QuadratureRule rule = polygon_rule(poly, quad_deg);
      const double area = polygon_signed_area(poly);
      for (int q = 0; q < rule.size(); ++q) {
        const VectorRd uq = u(rule.nodes[q]);
        const Eigen::VectorXd mv = mono.values(rule.nodes[q]);
        for (int beta = 0; beta < nkm2; ++beta) {
          local(layout.cell_moment(0, beta)) += rule.weights[q] * mv(beta) * uq.x() / area;
          local(layout.cell_moment(1, beta)) += rule.weights[q] * mv(beta) * uq.y() / area;
        }
      }
    }

    for (int l = 0; l < layout.size(); ++l) result(global[l]) = local(l);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Unisolvence diagnostic
// ---------------------------------------------------------------------------

UnisolvenceReport unisolvence_check(const SchemeConfig& config, const Polygon& polygon) {
  const ElementOperators op = build_element_operators(config, polygon);
  const int k = config.degree;
  const int ne = static_cast<int>(polygon.size());

  const int rows = 2 * ne * (k + 2) + 2 * op.Nkm2;
  Eigen::MatrixXd Phi(rows, op.n_dofs);
  int r = 0;
  for (int e = 0; e < ne; ++e)
    for (int c = 0; c < 2; ++c) {
      Phi.middleRows(r, k + 2) = op.trace[c][e];
      r += k + 2;
    }
  for (int c = 0; c < 2; ++c)
    for (int beta = 0; beta < op.Nkm2; ++beta) {
      Phi.row(r).setZero();
      Phi(r, op.layout.cell_moment(c, beta)) = 1.0;
      ++r;
    }

  UnisolvenceReport report;
  report.rows = rows;
  report.cols = op.n_dofs;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Phi);
  report.sigma_min = svd.singularValues().tail(1)(0);
  report.sigma_max = svd.singularValues()(0);
  return report;
}

} // namespace vem
