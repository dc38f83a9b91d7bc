// Convergence harness: closed-form benchmark cases, per-run error and
// divergence metrics, study grids over (family, level, degree, formulation,
// variant), observed-rate computation and deterministic CSV emission.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "vem/system.hpp"

namespace vem {

/// A closed-form flow problem on the unit square: velocity, its gradient
/// (row c holds the gradient of component c), a zero-mean pressure and the
/// matching load f = -Lap(u) + grad(p).
struct FlowCase {
  VectorField velocity;
  std::function<Eigen::Matrix2d(const VectorRd&)> velocity_gradient;
  std::function<double(const VectorRd&)> pressure;
  VectorField load;
};

/// The trigonometric/exponential benchmark
///   u = (cos(2 pi x) sin(2 pi y), -sin(2 pi x) cos(2 pi y)),
///   p = e^{x+y} - (e-1)^2,
/// divergence free with zero-mean pressure; f in closed form.
FlowCase manufactured_case();

/// Divergence-free polynomial data of exact degree k with pressure of degree
/// k-1, for patch tests: a degree-k scheme reproduces it up to round-off.
/// Degree 1 uses p = 0, the only zero-mean constant pressure. k in {1,2,3};
/// throws Error otherwise.
FlowCase polynomial_case(int degree);

/// Error and divergence metrics of one solve against a closed-form case.
struct RunResult {
  double h = 0.0; ///< largest cell diameter
  int n_dof_velocity = 0;
  int n_dof_pressure = 0;
  /// Relative errors: |u - P0_k u_h|_{1,h} / |u|_1, ||u - P0_k u_h||_0 /
  /// ||u||_0 and ||p - p_h||_0 / ||p||_0, all by element quadrature at degree
  /// 2k+4. A vanishing denominator (e.g. p = 0) switches to the absolute
  /// norm. The degree-k projection of u_h uses the exact moments where the
  /// space provides them and the elliptic projector above, which is the
  /// post-processing applied to the non-enhanced variant as well.
  double err_h1_u = 0.0, err_l2_u = 0.0, err_l2_p = 0.0;
  /// ||P0_ell div u_h||_0 over the mesh at ell = k-1, k, k+1. The first is
  /// exact on the virtual space; the higher two rely on the same moment
  /// substitution as above when the space is not enhanced.
  double div_km1 = 0.0, div_k = 0.0, div_kp1 = 0.0;
};

/// Solve the case on one mesh and measure every metric.
RunResult run_case(const PolyMesh& mesh, const SchemeConfig& config, const FlowCase& flow);

/// Cartesian study grid. Empty vectors yield an empty study (header-only
/// CSV). Rows are emitted in deterministic order: family, then formulation,
/// then variant, then degree, then level (innermost).
struct StudyGrid {
  std::vector<MeshFamily> families;
  int level_min = 1;
  int level_max = 1;
  std::vector<int> degrees;
  std::vector<Formulation> formulations;
  std::vector<bool> variants; ///< true = enhanced
  std::uint64_t seed = 0;
  /// When non-empty, every generated mesh is written to this directory as
  /// <family>_level<L>.txt.
  std::string mesh_dir;
};

/// One CSV row. Rates compare consecutive levels of the same (family,
/// formulation, variant, degree) key: log(e_prev/e_this) / log(h_prev/h_this);
/// NaN on the first level of a key or after a failed predecessor.
struct StudyRow {
  MeshFamily family = MeshFamily::M1;
  int level = 0;
  int degree = 0;
  Formulation formulation = Formulation::F1;
  bool enhanced = true;
  RunResult result;
  double rate_h1 = 0.0, rate_l2_u = 0.0, rate_l2_p = 0.0;
  std::string status; ///< "ok" or the error message
  bool ok() const { return status == "ok"; }
};

struct ConvergenceReport {
  std::vector<StudyRow> rows;
};

/// Exact CSV column list, also the first emitted line.
extern const char* const kCsvHeader;

/// Case selector per polynomial degree, so one study can pair each degree
/// with its own data (e.g. degree-matched patch data).
using CaseFactory = std::function<FlowCase(int degree)>;

/// Run the whole grid; failures are recorded per row (status column) and the
/// study continues. CSV rows stream to `csv` in grid order with full double
/// precision; identical (seed, grid) re-runs produce byte-identical output.
ConvergenceReport run_study(const StudyGrid& grid, const CaseFactory& make_case,
                            std::ostream& csv);
ConvergenceReport run_study(const StudyGrid& grid, const FlowCase& flow, std::ostream& csv);

/// Same, writing to a file (IoError when the file cannot be opened).
ConvergenceReport run_study_file(const StudyGrid& grid, const CaseFactory& make_case,
                                 const std::string& path);

/// Least-squares slope of log(err) against log(h). Pairs with non-finite or
/// non-positive entries are dropped; NaN when fewer than two remain.
double least_squares_slope(const std::vector<double>& hs, const std::vector<double>& errs);

} // namespace vem
