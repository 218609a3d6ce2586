// Lattice arithmetic on the triply periodic cuboid and convex polyhedra
// built by successive half-space cuts.

#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "rvegen/error.hpp"

namespace rvegen {

using Vec3 = Eigen::Vector3d;

/// Integer lattice shift u in Z^3; the physical offset is (u0*L1, u1*L2, u2*L3).
using Shift = std::array<int, 3>;

/// Periodic cuboid box with fundamental cell [-L1/2,L1/2] x [-L2/2,L2/2] x [-L3/2,L3/2].
class Lattice {
 public:
  Lattice() : Lattice(1.0, 1.0, 1.0) {}
  Lattice(double l1, double l2, double l3);

  const Vec3& lengths() const { return lengths_; }
  double length(int axis) const { return lengths_[axis]; }
  double volume() const { return lengths_.prod(); }
  double max_length() const { return lengths_.maxCoeff(); }

  Vec3 shift_vector(const Shift& u) const {
    return {u[0] * lengths_[0], u[1] * lengths_[1], u[2] * lengths_[2]};
  }

  /// True if x lies strictly inside the fundamental cell.
  bool contains_strictly(const Vec3& x) const;

 private:
  Vec3 lengths_;
};

/// Canonical representative of x modulo the lattice, in [-Li/2, Li/2) per axis.
Vec3 wrap_point(const Vec3& x, const Lattice& lat);

struct PeriodicDistance {
  double sq_distance = 0.0;
  Shift shift{0, 0, 0};  // minimizes |x - y - shift|
};

/// c(x,y) = min over lattice vectors u of |x - y - u|^2, together with a minimizing u.
PeriodicDistance periodic_sq_distance(const Vec3& x, const Vec3& y, const Lattice& lat);

/// Half-space {x : normal . x <= offset} with a unit normal.
struct Plane {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;

  /// Normalizes (normal, offset) so that |normal| = 1.
  static Plane from_unnormalized(const Vec3& normal, double offset);

  double signed_distance(const Vec3& x) const { return normal.dot(x) - offset; }
};

/// What lies on the other side of a facet: seed `seed` translated by `shift`,
/// or the initial bounding box when seed < 0.
struct NeighborTag {
  int seed = -1;
  Shift shift{0, 0, 0};

  static NeighborTag boundary() { return {}; }
  bool is_boundary() const { return seed < 0; }
  friend bool operator==(const NeighborTag&, const NeighborTag&) = default;
};

/// Planar convex polygon; vertices are counter-clockwise seen from outside.
struct Facet {
  std::vector<int> vertices;
  Plane plane;
  NeighborTag neighbor;
};

class ConvexPolyhedron {
 public:
  /// The empty polyhedron.
  ConvexPolyhedron() = default;
  ConvexPolyhedron(std::vector<Vec3> vertices, std::vector<Facet> facets);

  /// Axis-aligned box [lo, hi]; every facet carries `tag`.
  static ConvexPolyhedron box(const Vec3& lo, const Vec3& hi,
                              const NeighborTag& tag = NeighborTag::boundary());

  bool empty() const { return facets_.empty(); }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }
  std::size_t edge_count() const;

  /// Intersects with the half-space in place. Vertices within `snap_tolerance`
  /// of the plane are projected onto it. Returns true if the polyhedron changed.
  bool clip(const Plane& plane, const NeighborTag& tag, double snap_tolerance);

  /// Largest value of plane.signed_distance over the vertices.
  double max_signed_distance(const Plane& plane) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Facet> facets_;
};

/// poly intersected with {plane.normal . x <= plane.offset}; the new facet carries `tag`.
ConvexPolyhedron clip_by_halfspace(const ConvexPolyhedron& poly, const Plane& plane,
                                   const NeighborTag& tag, double snap_tolerance);

struct PolyhedronMeasures {
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  std::vector<double> facet_areas;
};

/// Volume, centroid and per-facet areas. Throws Error(EmptyCell) on an empty polyhedron.
PolyhedronMeasures polyhedron_measures(const ConvexPolyhedron& poly);

/// Area of one facet by fan triangulation.
double facet_area(const ConvexPolyhedron& poly, const Facet& facet);

/// Integral of |x - point|^2 over the polyhedron (zero when empty).
double second_moment(const ConvexPolyhedron& poly, const Vec3& point);

}  // namespace rvegen
