// Planar polygon utilities: areas, centroids, kernels (star-shapedness) and
// triangulation. Polygons are counterclockwise vertex loops without repeated
// points; all routines treat them as closed.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "vem/errors.hpp"

namespace vem {

using VectorRd = Eigen::Vector2d;
using Polygon = std::vector<VectorRd>;

/// Rotate a vector by +90 degrees (counterclockwise).
inline VectorRd rot90ccw(const VectorRd& v) { return VectorRd(-v.y(), v.x()); }

/// z-component of the cross product of two planar vectors.
inline double cross2(const VectorRd& a, const VectorRd& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Shoelace area; positive for counterclockwise loops.
double polygon_signed_area(const Polygon& poly);

/// Area centroid (center of gravity). Requires nonzero area.
VectorRd polygon_centroid(const Polygon& poly);

/// Largest pairwise vertex distance.
double polygon_diameter(const Polygon& poly);

/// True if no two non-adjacent edges intersect and no vertex repeats.
bool polygon_is_simple(const Polygon& poly);

/// True if every interior angle is <= pi (collinear vertices allowed).
bool polygon_is_convex(const Polygon& poly);

/// Throws GeometryError unless the polygon is simple, counterclockwise and
/// free of (near-)duplicate vertices.
void require_valid_polygon(const Polygon& poly);

/// Clip a convex polygon, keeping the points on or left of the directed line
/// a->b shifted left by `offset`. Returns the clipped polygon (possibly
/// empty); orientation is preserved.
Polygon clip_half_plane(const Polygon& subject, const VectorRd& a, const VectorRd& b,
                        double offset = 0.0);

/// Kernel of the polygon: the (convex, possibly empty) set of points that see
/// every boundary point. Computed by clipping a bounding box with every edge
/// half-plane.
Polygon polygon_kernel(const Polygon& poly);

/// True if q lies at signed distance >= margin from every edge line,
/// i.e. q is in the kernel with a safety margin.
bool kernel_contains(const Polygon& poly, const VectorRd& q, double margin = 0.0);

/// Radius of the largest disk contained in the kernel (0 if the kernel is
/// empty). Found by bisection on the inward-offset half-planes.
double kernel_disk_radius(const Polygon& poly);

/// Triangulate the polygon: a fan from the centroid when the centroid lies in
/// the kernel, otherwise ear clipping. The triangles partition the polygon.
std::vector<std::array<VectorRd, 3>> triangulate(const Polygon& poly);

} // namespace vem
