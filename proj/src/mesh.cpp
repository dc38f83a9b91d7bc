#include "vem/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace vem {

namespace {

// ---------------------------------------------------------------------------
// Deterministic uniform variates. The raw 64-bit engine output is mapped to a
// double explicitly so the generated meshes do not depend on the standard
// library's distribution implementation.
// ---------------------------------------------------------------------------
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
};

int vertex_index(int i, int j, int n) { return j * (n + 1) + i; }

int grid_n(int level) { return 4 << (level - 1); }

void require_level(int level) {
  if (level < 1 || level > 5)
    throw Error("mesh level must be between 1 and 5, got " + std::to_string(level));
}

// ---------------------------------------------------------------------------
// Voronoi machinery for the M2 family
// ---------------------------------------------------------------------------

std::vector<std::vector<int>> bucketize(const std::vector<VectorRd>& seeds, int nb) {
  std::vector<std::vector<int>> buckets(nb * nb);
  for (int i = 0; i < static_cast<int>(seeds.size()); ++i) {
    const int bi = std::clamp(static_cast<int>(seeds[i].x() * nb), 0, nb - 1);
    const int bj = std::clamp(static_cast<int>(seeds[i].y() * nb), 0, nb - 1);
    buckets[bj * nb + bi].push_back(i);
  }
  return buckets;
}

// Voronoi cell of seeds[i] clipped to the unit square. Candidate neighbours
// are visited by growing bucket rings; a seed at distance d can only cut the
// cell if d < 2R where R bounds the distance from seeds[i] to the current
// cell, so the ring loop stops early.
Polygon voronoi_cell(const std::vector<VectorRd>& seeds, int i,
                     const std::vector<std::vector<int>>& buckets, int nb) {
  const VectorRd s = seeds[i];
  Polygon cell = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  double R = 0.0;
  for (const auto& p : cell) R = std::max(R, (p - s).norm());

  auto clip_against = [&](int j) {
    const VectorRd d = seeds[j] - s;
    if (d.squaredNorm() >= 4.0 * R * R || d.squaredNorm() < 1e-24) return;
    const VectorRd m = s + 0.5 * d;
    cell = clip_half_plane(cell, m, m + rot90ccw(d));
    R = 0.0;
    for (const auto& p : cell) R = std::max(R, (p - s).norm());
  };

  const int bi = std::clamp(static_cast<int>(s.x() * nb), 0, nb - 1);
  const int bj = std::clamp(static_cast<int>(s.y() * nb), 0, nb - 1);
  for (int r = 0; r <= 2 * nb; ++r) {
    if (r > 0 && static_cast<double>(r - 1) / nb > 2.0 * R) break;
    for (int dj = -r; dj <= r; ++dj) {
      for (int di = -r; di <= r; ++di) {
        if (std::max(std::abs(di), std::abs(dj)) != r) continue;
        const int ci = bi + di, cj = bj + dj;
        if (ci < 0 || ci >= nb || cj < 0 || cj >= nb) continue;
        for (int j : buckets[cj * nb + ci])
          if (j != i) clip_against(j);
      }
    }
  }
  if (cell.size() < 3) throw MeshError("Voronoi cell degenerated during clipping");
  return cell;
}

// Merges nearly coincident vertices. The same Voronoi vertex is computed once
// per incident cell with different rounding; welding makes all cells share
// one representative coordinate, so shared edges cancel exactly in the
// shoelace sum and the cell areas add up to the exact square area.
struct Welder {
  static constexpr double kGrid = 1e-9;
  std::vector<VectorRd> points;
  std::unordered_map<std::uint64_t, std::vector<int>> grid;

  static std::uint64_t key(long long ix, long long iy) {
    return (static_cast<std::uint64_t>(ix) << 32) ^ static_cast<std::uint64_t>(iy);
  }

  int add(const VectorRd& p) {
    const long long ix = std::llround(p.x() / kGrid);
    const long long iy = std::llround(p.y() / kGrid);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(key(ix + dx, iy + dy));
        if (it == grid.end()) continue;
        for (int id : it->second)
          if ((points[id] - p).norm() <= 2.0 * kGrid) return id;
      }
    }
    points.push_back(p);
    const int id = static_cast<int>(points.size()) - 1;
    grid[key(ix, iy)].push_back(id);
    return id;
  }
};

void dedupe_cycle(std::vector<int>& cycle) {
  std::vector<int> out;
  for (int v : cycle)
    if (out.empty() || out.back() != v) out.push_back(v);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  cycle = std::move(out);
}

// Collapse edges shorter than eps by merging their endpoints (union-find).
// Representatives preserve the domain boundary: exact corners win, then
// points on a side (the merged point is snapped back onto that side), then
// the cluster mean. Returns false when nothing was merged.
bool collapse_short_edges(std::vector<VectorRd>& pts,
                          std::vector<std::vector<int>>& cycles, double eps) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    return parent[a] == a ? a : parent[a] = find(parent[a]);
  };

  bool any = false;
  for (const auto& cycle : cycles) {
    const int m = static_cast<int>(cycle.size());
    for (int i = 0; i < m; ++i) {
      const int a = cycle[i], b = cycle[(i + 1) % m];
      if ((pts[a] - pts[b]).norm() < eps && find(a) != find(b)) {
        parent[find(a)] = find(b);
        any = true;
      }
    }
  }
  if (!any) return false;

  std::unordered_map<int, std::vector<int>> clusters;
  for (int v = 0; v < n; ++v) clusters[find(v)].push_back(v);
  for (const auto& [root, members] : clusters) {
    if (members.size() == 1) continue;
    VectorRd mean = VectorRd::Zero();
    bool x0 = false, x1 = false, y0 = false, y1 = false;
    for (int v : members) {
      mean += pts[v];
      x0 |= pts[v].x() == 0.0;
      x1 |= pts[v].x() == 1.0;
      y0 |= pts[v].y() == 0.0;
      y1 |= pts[v].y() == 1.0;
    }
    mean /= static_cast<double>(members.size());
    if (x0) mean.x() = 0.0;
    if (x1) mean.x() = 1.0;
    if (y0) mean.y() = 0.0;
    if (y1) mean.y() = 1.0;
    pts[root] = mean;
  }

  for (auto& cycle : cycles) {
    for (int& v : cycle) v = find(v);
    dedupe_cycle(cycle);
    if (cycle.size() < 3) throw MeshError("short-edge collapse destroyed a cell");
  }
  return true;
}

void compact_vertices(std::vector<VectorRd>& pts, std::vector<std::vector<int>>& cycles) {
  std::vector<int> remap(pts.size(), -1);
  std::vector<VectorRd> kept;
  for (auto& cycle : cycles) {
    for (int& v : cycle) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(kept.size());
        kept.push_back(pts[v]);
      }
      v = remap[v];
    }
  }
  pts = std::move(kept);
}

// ---------------------------------------------------------------------------
// Family generators
// ---------------------------------------------------------------------------

PolyMesh generate_m2(int level, std::uint64_t seed) {
  const int n = 5 << (level - 1);
  Rng rng(seed);

  std::vector<VectorRd> seeds;
  seeds.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      seeds.emplace_back((i + 0.5 + rng.uniform(-0.35, 0.35)) / n,
                         (j + 0.5 + rng.uniform(-0.35, 0.35)) / n);

  // Lloyd sweeps round the cells off, then one final tessellation from the
  // relaxed seeds.
  const int kSweeps = 3;
  const int n_seeds = static_cast<int>(seeds.size());
  std::vector<Polygon> cells(n_seeds);
  for (int sweep = 0; sweep <= kSweeps; ++sweep) {
    const auto buckets = bucketize(seeds, n);
    for (int i = 0; i < n_seeds; ++i) cells[i] = voronoi_cell(seeds, i, buckets, n);
    if (sweep < kSweeps)
      for (int i = 0; i < n_seeds; ++i) seeds[i] = polygon_centroid(cells[i]);
  }

  Welder welder;
  std::vector<std::vector<int>> cycles(n_seeds);
  for (int i = 0; i < n_seeds; ++i) {
    for (const auto& p : cells[i]) cycles[i].push_back(welder.add(p));
    dedupe_cycle(cycles[i]);
  }

  std::vector<VectorRd> pts = std::move(welder.points);
  for (int pass = 0; pass < 8; ++pass)
    if (!collapse_short_edges(pts, cycles, 0.02 / n)) break;
  compact_vertices(pts, cycles);

  return build_mesh(std::move(pts), std::move(cycles));
}

// Congruent non-convex octagons: each grid cell is a square with all four
// edge midpoints inserted; midpoints of interior horizontal grid lines are
// shifted upward by 0.2 of the cell size, denting every cell from below (a
// concave corner) and bulging it out on top, so neighbouring cells still
// tile exactly.
PolyMesh generate_m3(int level) {
  const int n = grid_n(level);
  const double h = 1.0 / n;
  const int n_corner = (n + 1) * (n + 1);
  const int n_hmid = n * (n + 1);

  std::vector<VectorRd> vertices(n_corner + 2 * n_hmid);
  auto corner = [&](int i, int j) { return vertex_index(i, j, n); };
  auto hmid = [&](int i, int j) { return n_corner + j * n + i; };
  auto vmid = [&](int i, int j) { return n_corner + n_hmid + j * (n + 1) + i; };

  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices[corner(i, j)] = VectorRd(i * h, j * h);
  for (int j = 0; j <= n; ++j) {
    const double lift = (j > 0 && j < n) ? 0.2 * h : 0.0;
    for (int i = 0; i < n; ++i)
      vertices[hmid(i, j)] = VectorRd((i + 0.5) * h, j * h + lift);
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices[vmid(i, j)] = VectorRd(i * h, (j + 0.5) * h);

  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({corner(i, j), hmid(i, j), corner(i + 1, j), vmid(i + 1, j),
                       corner(i + 1, j + 1), hmid(i, j + 1), corner(i, j + 1),
                       vmid(i, j)});
    }
  }
  return build_mesh(std::move(vertices), std::move(cells));
}

} // namespace

// ---------------------------------------------------------------------------
// Families: parsing and dispatch
// ---------------------------------------------------------------------------

MeshFamily parse_family(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "m1") return MeshFamily::M1;
  if (s == "m2") return MeshFamily::M2;
  if (s == "m3") return MeshFamily::M3;
  throw Error("unknown mesh family '" + name + "' (expected m1, m2 or m3)");
}

std::string family_name(MeshFamily family) {
  switch (family) {
    case MeshFamily::M1: return "m1";
    case MeshFamily::M2: return "m2";
    case MeshFamily::M3: return "m3";
  }
  throw Error("invalid mesh family");
}

PolyMesh generate_m1(int level, std::uint64_t seed, double perturbation) {
  require_level(level);
  const int n = grid_n(level);
  const double h = 1.0 / n;
  Rng rng(seed);

  std::vector<VectorRd> vertices((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices[vertex_index(i, j, n)] = VectorRd(i * h, j * h);
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      const double dx = rng.uniform(-perturbation, perturbation) * h;
      const double dy = rng.uniform(-perturbation, perturbation) * h;
      vertices[vertex_index(i, j, n)] += VectorRd(dx, dy);
    }
  }

  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      cells.push_back({vertex_index(i, j, n), vertex_index(i + 1, j, n),
                       vertex_index(i + 1, j + 1, n), vertex_index(i, j + 1, n)});
  return build_mesh(std::move(vertices), std::move(cells));
}

PolyMesh generate_mesh(MeshFamily family, int level, std::uint64_t seed) {
  require_level(level);
  PolyMesh mesh;
  switch (family) {
    case MeshFamily::M1: mesh = generate_m1(level, seed, 0.25); break;
    case MeshFamily::M2: mesh = generate_m2(level, seed); break;
    case MeshFamily::M3: mesh = generate_m3(level); break;
  }

  check_mesh(mesh);
  const RegularityReport report = regularity_report(mesh);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& el = report.elements[c];
    if (!el.star_shaped || el.min_edge_ratio <= 0.01)
      throw MeshError("generated mesh fails the regularity floor (family " +
                      family_name(family) + ", level " + std::to_string(level) +
                      ", cell " + std::to_string(c) + ")");
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

Polygon PolyMesh::cell_polygon(int c) const {
  Polygon poly;
  poly.reserve(cells[c].size());
  for (int v : cells[c]) poly.push_back(vertices[v]);
  return poly;
}

PolyMesh build_mesh(std::vector<VectorRd> vertices, std::vector<std::vector<int>> cells) {
  PolyMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);

  const int nc = mesh.n_cells();
  if (nc == 0) throw MeshError("mesh has no cells");

  for (int c = 0; c < nc; ++c) {
    for (int v : mesh.cells[c])
      if (v < 0 || v >= mesh.n_vertices())
        throw MeshError("cell " + std::to_string(c) + " references vertex " +
                        std::to_string(v) + " out of range");
    try {
      require_valid_polygon(mesh.cell_polygon(c));
    } catch (const GeometryError& e) {
      throw MeshError("cell " + std::to_string(c) + ": " + e.what());
    }
  }

  std::map<std::array<int, 2>, int> edge_ids;
  mesh.cell_edges.resize(nc);
  mesh.cell_edge_signs.resize(nc);
  // +1 incidence count per direction; detects non-manifold connectivity.
  std::vector<std::array<int, 2>> direction_count;

  for (int c = 0; c < nc; ++c) {
    const auto& cycle = mesh.cells[c];
    const int m = static_cast<int>(cycle.size());
    for (int i = 0; i < m; ++i) {
      const int a = cycle[i], b = cycle[(i + 1) % m];
      const std::array<int, 2> key = {std::min(a, b), std::max(a, b)};
      auto [it, inserted] = edge_ids.try_emplace(key, static_cast<int>(mesh.edges.size()));
      if (inserted) {
        mesh.edges.push_back(key);
        direction_count.push_back({0, 0});
      }
      const int e = it->second;
      const int sign = (a > b) ? +1 : -1; // +1: traversed hi->lo, normal outward
      mesh.cell_edges[c].push_back(e);
      mesh.cell_edge_signs[c].push_back(sign);
      ++direction_count[e][sign > 0 ? 0 : 1];
    }
  }

  mesh.edge_on_boundary.assign(mesh.n_edges(), false);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const int total = direction_count[e][0] + direction_count[e][1];
    if (total == 1) {
      mesh.edge_on_boundary[e] = true;
    } else if (total == 2) {
      if (direction_count[e][0] != 1)
        throw MeshError("edge " + std::to_string(e) +
                        " is traversed twice in the same direction (overlapping cells)");
    } else {
      throw MeshError("edge " + std::to_string(e) + " is shared by " +
                      std::to_string(total) + " cells");
    }
  }

  mesh.vertex_on_boundary.assign(mesh.n_vertices(), false);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (!mesh.edge_on_boundary[e]) continue;
    mesh.vertex_on_boundary[mesh.edges[e][0]] = true;
    mesh.vertex_on_boundary[mesh.edges[e][1]] = true;
  }

  mesh.cell_areas.resize(nc);
  mesh.cell_diameters.resize(nc);
  mesh.cell_centroids.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const Polygon poly = mesh.cell_polygon(c);
    mesh.cell_areas[c] = polygon_signed_area(poly);
    mesh.cell_diameters[c] = polygon_diameter(poly);
    mesh.cell_centroids[c] = polygon_centroid(poly);
  }
  return mesh;
}

void check_mesh(const PolyMesh& mesh) {
  if (mesh.n_cells() == 0) throw MeshError("mesh has no cells");

  double total_area = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    try {
      require_valid_polygon(mesh.cell_polygon(c));
    } catch (const GeometryError& e) {
      throw MeshError("cell " + std::to_string(c) + ": " + e.what());
    }
    total_area += mesh.cell_areas[c];
  }
  if (std::abs(total_area - 1.0) > 1e-12)
    throw MeshError("cell areas sum to " + std::to_string(total_area) +
                    ", expected the unit-square area 1");

  std::vector<int> count(mesh.n_edges(), 0), sign_sum(mesh.n_edges(), 0);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (mesh.cell_edges[c].size() != mesh.cells[c].size())
      throw MeshError("cell " + std::to_string(c) + " has inconsistent edge incidence");
    for (size_t i = 0; i < mesh.cell_edges[c].size(); ++i) {
      const int e = mesh.cell_edges[c][i];
      ++count[e];
      sign_sum[e] += mesh.cell_edge_signs[c][i];
    }
  }
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edge_on_boundary[e]) {
      if (count[e] != 1)
        throw MeshError("boundary edge " + std::to_string(e) + " has " +
                        std::to_string(count[e]) + " incident cells");
    } else {
      if (count[e] != 2 || sign_sum[e] != 0)
        throw MeshError("interior edge " + std::to_string(e) +
                        " lacks two opposite-sign incidences");
    }
  }
}

double mesh_diameter(const PolyMesh& mesh) {
  return *std::max_element(mesh.cell_diameters.begin(), mesh.cell_diameters.end());
}

RegularityReport regularity_report(const PolyMesh& mesh) {
  RegularityReport report;
  report.elements.resize(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    ElementRegularity& el = report.elements[c];
    const Polygon poly = mesh.cell_polygon(c);
    el.h_P = mesh.cell_diameters[c];
    double min_edge = std::numeric_limits<double>::infinity();
    for (int e : mesh.cell_edges[c]) min_edge = std::min(min_edge, mesh.edge_length(e));
    el.min_edge_ratio = min_edge / el.h_P;
    el.convex = polygon_is_convex(poly);
    const double r = kernel_disk_radius(poly);
    el.rho = r / el.h_P;
    el.star_shaped = el.rho > 1e-9;
    report.h = std::max(report.h, el.h_P);
    report.min_edge_ratio = std::min(report.min_edge_ratio, el.min_edge_ratio);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void write_mesh(const PolyMesh& mesh, std::ostream& out) {
  out << "vem-poly-mesh 1\n";
  out << mesh.n_vertices() << ' ' << mesh.n_cells() << '\n';
  char buf[80];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    out << buf;
  }
  for (const auto& cycle : mesh.cells) {
    out << cycle.size();
    for (int v : cycle) out << ' ' << v;
    out << '\n';
  }
  if (!out) throw IoError("failed while writing mesh stream");
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& message) {
  throw IoError("mesh parse error at line " + std::to_string(line) + ": " + message);
}

} // namespace

PolyMesh read_mesh(std::istream& in) {
  std::string text_line;
  int line = 0;
  auto next_line = [&](std::istringstream& stream) {
    if (!std::getline(in, text_line)) parse_fail(line + 1, "unexpected end of stream");
    ++line;
    stream.clear();
    stream.str(text_line);
  };

  std::istringstream ls;
  next_line(ls);
  std::string magic;
  int version = 0;
  if (!(ls >> magic >> version) || magic != "vem-poly-mesh" || version != 1)
    parse_fail(line, "expected header 'vem-poly-mesh 1'");

  next_line(ls);
  int nv = 0, nc = 0;
  if (!(ls >> nv >> nc)) parse_fail(line, "expected '<n_vertices> <n_cells>'");
  if (nv < 3) parse_fail(line, "mesh needs at least 3 vertices");
  if (nc < 1) parse_fail(line, "mesh has no cells");

  std::vector<VectorRd> vertices(nv);
  for (int v = 0; v < nv; ++v) {
    next_line(ls);
    if (!(ls >> vertices[v].x() >> vertices[v].y()))
      parse_fail(line, "expected vertex coordinates '<x> <y>'");
  }

  std::vector<std::vector<int>> cells(nc);
  for (int c = 0; c < nc; ++c) {
    next_line(ls);
    int m = 0;
    if (!(ls >> m)) parse_fail(line, "expected cell size");
    if (m < 3) parse_fail(line, "cell has fewer than 3 vertices");
    cells[c].resize(m);
    for (int i = 0; i < m; ++i) {
      if (!(ls >> cells[c][i])) parse_fail(line, "expected cell vertex index");
      if (cells[c][i] < 0 || cells[c][i] >= nv)
        parse_fail(line, "vertex index " + std::to_string(cells[c][i]) + " out of range");
    }
    Polygon poly;
    for (int v : cells[c]) poly.push_back(vertices[v]);
    if (polygon_signed_area(poly) <= 0.0)
      parse_fail(line, "cell cycle is not counterclockwise");
  }

  return build_mesh(std::move(vertices), std::move(cells));
}

void write_mesh_file(const PolyMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_mesh(mesh, out);
}

PolyMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_mesh(in);
}

} // namespace vem
