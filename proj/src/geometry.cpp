#include "vem/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vem {

namespace {

// Relative tolerance used for orientation/degeneracy decisions.
constexpr double kGeomTol = 1e-12;

double scale_of(const Polygon& poly) {
  double s = 0.0;
  for (const auto& p : poly) s = std::max(s, p.lpNorm<Eigen::Infinity>());
  return std::max(s, 1e-300);
}

Polygon bounding_box_polygon(const Polygon& poly, double pad) {
  VectorRd lo = poly.front(), hi = poly.front();
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo.array() -= pad;
  hi.array() += pad;
  return {VectorRd(lo.x(), lo.y()), VectorRd(hi.x(), lo.y()),
          VectorRd(hi.x(), hi.y()), VectorRd(lo.x(), hi.y())};
}

} // namespace

Polygon clip_half_plane(const Polygon& subject, const VectorRd& a, const VectorRd& b,
                        double offset) {
  const VectorRd d = b - a;
  const double len = d.norm();
  if (len == 0.0) return subject;
  const VectorRd n = rot90ccw(d) / len; // unit inward normal of the edge line
  auto sdist = [&](const VectorRd& p) { return n.dot(p - a) - offset; };

  Polygon out;
  const int m = static_cast<int>(subject.size());
  for (int i = 0; i < m; ++i) {
    const VectorRd& p = subject[i];
    const VectorRd& q = subject[(i + 1) % m];
    const double dp = sdist(p);
    const double dq = sdist(q);
    if (dp >= 0.0) out.push_back(p);
    if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
      out.push_back(p + (dp / (dp - dq)) * (q - p));
    }
  }
  return out;
}

namespace {

Polygon kernel_with_offset(const Polygon& poly, double offset) {
  Polygon ker = bounding_box_polygon(poly, polygon_diameter(poly));
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m && !ker.empty(); ++i) {
    ker = clip_half_plane(ker, poly[i], poly[(i + 1) % m], offset);
  }
  return ker;
}

bool point_in_triangle(const VectorRd& p, const VectorRd& a, const VectorRd& b,
                       const VectorRd& c, double tol) {
  const double s1 = cross2(b - a, p - a);
  const double s2 = cross2(c - b, p - b);
  const double s3 = cross2(a - c, p - c);
  return s1 >= -tol && s2 >= -tol && s3 >= -tol;
}

std::vector<std::array<VectorRd, 3>> ear_clip(const Polygon& poly) {
  const double diam = polygon_diameter(poly);
  const double area_tol = kGeomTol * diam * diam;

  std::vector<int> idx(poly.size());
  for (size_t i = 0; i < poly.size(); ++i) idx[i] = static_cast<int>(i);

  std::vector<std::array<VectorRd, 3>> tris;
  while (idx.size() > 3) {
    const int m = static_cast<int>(idx.size());
    bool clipped = false;
    for (int i = 0; i < m; ++i) {
      const VectorRd& a = poly[idx[(i + m - 1) % m]];
      const VectorRd& b = poly[idx[i]];
      const VectorRd& c = poly[idx[(i + 1) % m]];
      const double turn = cross2(b - a, c - b);
      if (std::abs(turn) <= area_tol) {
        // Collinear corner: drop the middle vertex, no triangle to emit.
        idx.erase(idx.begin() + i);
        clipped = true;
        break;
      }
      if (turn < 0.0) continue; // reflex corner, not an ear
      bool blocked = false;
      for (int j = 0; j < m && !blocked; ++j) {
        if (j == i || j == (i + m - 1) % m || j == (i + 1) % m) continue;
        blocked = point_in_triangle(poly[idx[j]], a, b, c, area_tol);
      }
      if (blocked) continue;
      tris.push_back({a, b, c});
      idx.erase(idx.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped) throw GeometryError("ear clipping failed: no ear found");
  }
  if (idx.size() == 3) {
    const VectorRd& a = poly[idx[0]];
    const VectorRd& b = poly[idx[1]];
    const VectorRd& c = poly[idx[2]];
    if (std::abs(cross2(b - a, c - a)) > 2.0 * area_tol) tris.push_back({a, b, c});
  }
  return tris;
}

// Proper or touching intersection of segments [a,b] and [c,d], excluding the
// shared-endpoint case handled by the caller.
bool segments_intersect(const VectorRd& a, const VectorRd& b, const VectorRd& c,
                        const VectorRd& d, double tol) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
      ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
    return true;
  auto on_segment = [&](const VectorRd& p, const VectorRd& q, const VectorRd& r) {
    return std::abs(cross2(q - p, r - p)) <= tol &&
           r.x() >= std::min(p.x(), q.x()) - tol && r.x() <= std::max(p.x(), q.x()) + tol &&
           r.y() >= std::min(p.y(), q.y()) - tol && r.y() <= std::max(p.y(), q.y()) + tol;
  };
  return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) ||
         on_segment(c, d, b);
}

} // namespace

// The shoelace sums are evaluated relative to the first vertex: on small
// polygons far from the origin the raw formula loses most of its digits to
// cancellation.
double polygon_signed_area(const Polygon& poly) {
  const int m = static_cast<int>(poly.size());
  const VectorRd o = poly.front();
  double twice = 0.0;
  for (int i = 0; i < m; ++i) twice += cross2(poly[i] - o, poly[(i + 1) % m] - o);
  return 0.5 * twice;
}

VectorRd polygon_centroid(const Polygon& poly) {
  const int m = static_cast<int>(poly.size());
  const double area = polygon_signed_area(poly);
  if (area == 0.0) throw GeometryError("polygon centroid: zero area");
  const VectorRd o = poly.front();
  VectorRd c = VectorRd::Zero();
  for (int i = 0; i < m; ++i) {
    const VectorRd p = poly[i] - o;
    const VectorRd q = poly[(i + 1) % m] - o;
    c += (p + q) * cross2(p, q);
  }
  return o + c / (6.0 * area);
}

double polygon_diameter(const Polygon& poly) {
  double d2 = 0.0;
  for (size_t i = 0; i < poly.size(); ++i)
    for (size_t j = i + 1; j < poly.size(); ++j)
      d2 = std::max(d2, (poly[i] - poly[j]).squaredNorm());
  return std::sqrt(d2);
}

bool polygon_is_simple(const Polygon& poly) {
  const int m = static_cast<int>(poly.size());
  if (m < 3) return false;
  const double s = scale_of(poly);
  const double tol = kGeomTol * s * s;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == m - 1);
      if (adjacent) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % m], poly[j], poly[(j + 1) % m], tol))
        return false;
    }
  }
  return true;
}

bool polygon_is_convex(const Polygon& poly) {
  const int m = static_cast<int>(poly.size());
  const double diam = polygon_diameter(poly);
  const double tol = kGeomTol * diam * diam;
  for (int i = 0; i < m; ++i) {
    const VectorRd& a = poly[(i + m - 1) % m];
    const VectorRd& b = poly[i];
    const VectorRd& c = poly[(i + 1) % m];
    if (cross2(b - a, c - b) < -tol) return false;
  }
  return true;
}

void require_valid_polygon(const Polygon& poly) {
  if (poly.size() < 3) throw GeometryError("polygon has fewer than 3 vertices");
  const double s = scale_of(poly);
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    if ((poly[i] - poly[(i + 1) % m]).norm() <= 1e-14 * s)
      throw GeometryError("polygon has a (near-)zero-length edge");
  }
  if (!polygon_is_simple(poly)) throw GeometryError("polygon is not simple");
  if (polygon_signed_area(poly) <= 0.0)
    throw GeometryError("polygon is not counterclockwise");
}

Polygon polygon_kernel(const Polygon& poly) { return kernel_with_offset(poly, 0.0); }

bool kernel_contains(const Polygon& poly, const VectorRd& q, double margin) {
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    const VectorRd& a = poly[i];
    const VectorRd& b = poly[(i + 1) % m];
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    if (cross2(b - a, q - a) / len < margin) return false;
  }
  return true;
}

double kernel_disk_radius(const Polygon& poly) {
  Polygon ker = polygon_kernel(poly);
  if (ker.size() < 3 || polygon_signed_area(ker) <= 0.0) return 0.0;
  double lo = 0.0, hi = 0.5 * polygon_diameter(poly);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    Polygon shrunk = kernel_with_offset(poly, mid);
    if (shrunk.size() >= 3 && polygon_signed_area(shrunk) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::vector<std::array<VectorRd, 3>> triangulate(const Polygon& poly) {
  require_valid_polygon(poly);
  const VectorRd c = polygon_centroid(poly);
  const double margin = kGeomTol * polygon_diameter(poly);
  if (kernel_contains(poly, c, margin)) {
    std::vector<std::array<VectorRd, 3>> tris;
    const int m = static_cast<int>(poly.size());
    tris.reserve(m);
    for (int i = 0; i < m; ++i) tris.push_back({c, poly[i], poly[(i + 1) % m]});
    return tris;
  }
  return ear_clip(poly);
}

} // namespace vem
