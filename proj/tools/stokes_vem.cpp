// Command-line driver: convergence/patch studies with CSV output plus
// optional inf-sup and assembled-system diagnostics.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vem/harness.hpp"

namespace {

/// Parse "A..B" or a single "A" into an inclusive level range.
std::pair<int, int> parse_levels(const std::string& text) {
  const std::size_t sep = text.find("..");
  try {
    std::size_t used = 0;
    if (sep == std::string::npos) {
      const int a = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {a, a};
    }
    const std::string lo = text.substr(0, sep), hi = text.substr(sep + 2);
    const int a = std::stoi(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    const int b = std::stoi(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
    return {a, b};
  } catch (const std::exception&) {
    throw vem::Error("invalid --levels '" + text + "': expected A or A..B");
  }
}

std::string csv_stem(const std::string& path) {
  const std::string suffix = ".csv";
  if (path.size() > suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return path.substr(0, path.size() - suffix.size());
  return path;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polygonal virtual element solver for the 2D Stokes problem"};
  app.require_subcommand(1);

  CLI::App* study = app.add_subcommand(
      "study", "Run a convergence study over mesh levels and write a CSV report");
  std::string family_text, levels_text, formulation_text, out_path, mesh_dir;
  std::vector<int> degrees;
  std::uint64_t seed = 0;
  bool enhanced = false, regular = false;
  bool dump_system_files = false, with_infsup = false, patch_test = false;
  study->add_option("--family", family_text, "Mesh family: m1, m2 or m3")->required();
  study->add_option("--levels", levels_text, "Refinement levels, A or A..B (1..5)")
      ->required();
  study->add_option("--degree", degrees, "Polynomial degree(s) k >= 1, comma separated")
      ->required()
      ->delimiter(',');
  study->add_option("--formulation", formulation_text, "Velocity formulation: f1 or f2")
      ->required();
  CLI::Option* enh_flag = study->add_flag("--enhanced", enhanced, "Enhanced variant");
  study->add_flag("--regular", regular, "Regular (non-enhanced) variant")
      ->excludes(enh_flag);
  study->add_option("--seed", seed, "Mesh generation seed")->required();
  study->add_option("--out", out_path, "Output CSV path")->required();
  study->add_option("--mesh-dir", mesh_dir,
                    "Write every generated mesh to this directory");
  study->add_flag("--dump-system", dump_system_files,
                  "Write the reduced linear system of every run next to the CSV");
  study->add_flag("--infsup", with_infsup,
                  "Also print inf-sup constants (with negative control) per run");
  study->add_flag("--patch-test", patch_test,
                  "Use degree-matched divergence-free polynomial data instead of the "
                  "trigonometric benchmark");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!enhanced && !regular)
      throw vem::Error("pass exactly one of --enhanced / --regular");

    vem::StudyGrid grid;
    grid.families = {vem::parse_family(family_text)};
    std::tie(grid.level_min, grid.level_max) = parse_levels(levels_text);
    grid.degrees = degrees;
    grid.formulations = {vem::parse_formulation(formulation_text)};
    grid.variants = {enhanced};
    grid.seed = seed;
    grid.mesh_dir = mesh_dir;

    const vem::CaseFactory make_case = [patch_test](int k) {
      return patch_test ? vem::polynomial_case(k) : vem::manufactured_case();
    };
    const vem::ConvergenceReport report = vem::run_study_file(grid, make_case, out_path);

    int failed = 0;
    for (const vem::StudyRow& row : report.rows)
      if (!row.ok()) ++failed;
    std::printf("study: %zu runs, %d failed, CSV written to %s\n", report.rows.size(),
                failed, out_path.c_str());

    for (const int k : grid.degrees) {
      std::vector<double> hs, e_h1, e_l2u, e_l2p;
      for (const vem::StudyRow& row : report.rows) {
        if (row.degree != k || !row.ok()) continue;
        hs.push_back(row.result.h);
        e_h1.push_back(row.result.err_h1_u);
        e_l2u.push_back(row.result.err_l2_u);
        e_l2p.push_back(row.result.err_l2_p);
      }
      if (hs.size() < 2) continue;
      const std::size_t window = std::min<std::size_t>(3, hs.size());
      const std::size_t from = hs.size() - window;
      const auto tail = [from](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(from), v.end());
      };
      std::printf("slopes k=%d (least squares, last %zu levels): "
                  "h1_u=%.3f l2_u=%.3f l2_p=%.3f\n",
                  k, window, vem::least_squares_slope(tail(hs), tail(e_h1)),
                  vem::least_squares_slope(tail(hs), tail(e_l2u)),
                  vem::least_squares_slope(tail(hs), tail(e_l2p)));
    }

    if (with_infsup || dump_system_files) {
      for (const int k : grid.degrees) {
        for (int level = grid.level_min; level <= grid.level_max; ++level) {
          const vem::PolyMesh mesh = generate_mesh(grid.families[0], level, seed);
          const vem::SchemeConfig config{grid.formulations[0], k, enhanced};
          if (with_infsup) {
            const vem::InfSupReport healthy = vem::infsup_estimate(mesh, config);
            const vem::InfSupReport control = vem::infsup_estimate(mesh, config, k);
            std::printf("infsup family=%s level=%d k=%d formulation=%s "
                        "beta=%.6g control_beta=%.6g\n",
                        family_name(grid.families[0]).c_str(), level, k,
                        formulation_name(grid.formulations[0]).c_str(), healthy.beta,
                        control.beta);
          }
          if (dump_system_files) {
            const vem::FlowCase flow = make_case(k);
            const vem::AssembledSystem sys =
                vem::assemble_system(mesh, config, flow.load, flow.velocity);
            const std::string path = csv_stem(out_path) + "-system-" +
                                     family_name(grid.families[0]) + "-L" +
                                     std::to_string(level) + "-k" + std::to_string(k) +
                                     "-" + formulation_name(grid.formulations[0]) +
                                     (enhanced ? "-enhanced" : "-regular") + ".txt";
            std::ofstream out(path);
            if (!out) throw vem::IoError("cannot open '" + path + "' for writing");
            vem::dump_system(sys, out);
            std::printf("system dump written to %s\n", path.c_str());
          }
        }
      }
    }

    return failed == 0 ? 0 : 2;
  } catch (const vem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
