#include "rvegen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace rvegen {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::EmptyCell: return "empty cell";
    case ErrorCode::DegeneratePair: return "degenerate pair";
    case ErrorCode::DistantImage: return "cell may be cut by distant image";
    case ErrorCode::InfeasibleInitialGuess: return "infeasible initial guess";
    case ErrorCode::LineSearchFailed: return "line search failed";
    case ErrorCode::MaxIterationsExceeded: return "max iterations exceeded";
    case ErrorCode::SingularReducedHessian: return "singular reduced Hessian";
    case ErrorCode::SeedSampling: return "seed sampling failed";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

Lattice::Lattice(double l1, double l2, double l3) : lengths_(l1, l2, l3) {
  if (!(l1 > 0.0 && l2 > 0.0 && l3 > 0.0) || !lengths_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "lattice lengths must be positive");
}

bool Lattice::contains_strictly(const Vec3& x) const {
  for (int k = 0; k < 3; ++k) {
    const double h = 0.5 * lengths_[k];
    if (!(x[k] > -h && x[k] < h)) return false;
  }
  return true;
}

Vec3 wrap_point(const Vec3& x, const Lattice& lat) {
  Vec3 r;
  for (int k = 0; k < 3; ++k) {
    const double len = lat.length(k);
    const double h = 0.5 * len;
    double t = x[k];
    if (t >= -h && t < h) {
      r[k] = t;
      continue;
    }
    t -= len * std::floor((t + h) / len);
    if (t >= h) t -= len;
    if (t < -h) t += len;
    // rounding can leave t a few ulps outside; clamp onto the closed side
    if (t >= h || t < -h) t = -h;
    r[k] = t;
  }
  return r;
}

PeriodicDistance periodic_sq_distance(const Vec3& x, const Vec3& y, const Lattice& lat) {
  PeriodicDistance out;
  for (int k = 0; k < 3; ++k) {
    const double len = lat.length(k);
    const double d = x[k] - y[k];
    const int centre = static_cast<int>(std::lround(d / len));
    double best = std::numeric_limits<double>::infinity();
    int best_u = centre;
    for (int u = centre - 1; u <= centre + 1; ++u) {
      const double t = d - u * len;
      if (t * t < best) {
        best = t * t;
        best_u = u;
      }
    }
    out.sq_distance += best;
    out.shift[k] = best_u;
  }
  return out;
}

Plane Plane::from_unnormalized(const Vec3& normal, double offset) {
  const double norm = normal.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::InvalidArgument, "plane normal is zero");
  return {normal / norm, offset / norm};
}

ConvexPolyhedron::ConvexPolyhedron(std::vector<Vec3> vertices, std::vector<Facet> facets)
    : vertices_(std::move(vertices)), facets_(std::move(facets)) {}

ConvexPolyhedron ConvexPolyhedron::box(const Vec3& lo, const Vec3& hi, const NeighborTag& tag) {
  std::vector<Vec3> v(8);
  for (int c = 0; c < 8; ++c)
    v[c] = Vec3((c & 1) ? hi[0] : lo[0], (c & 2) ? hi[1] : lo[1], (c & 4) ? hi[2] : lo[2]);
  // counter-clockwise seen from outside
  std::vector<Facet> f = {
      {{0, 4, 6, 2}, {-Vec3::UnitX(), -lo[0]}, tag},
      {{1, 3, 7, 5}, {Vec3::UnitX(), hi[0]}, tag},
      {{0, 1, 5, 4}, {-Vec3::UnitY(), -lo[1]}, tag},
      {{2, 6, 7, 3}, {Vec3::UnitY(), hi[1]}, tag},
      {{0, 2, 3, 1}, {-Vec3::UnitZ(), -lo[2]}, tag},
      {{4, 5, 7, 6}, {Vec3::UnitZ(), hi[2]}, tag},
  };
  return {std::move(v), std::move(f)};
}

std::size_t ConvexPolyhedron::edge_count() const {
  std::size_t half_edges = 0;
  for (const auto& f : facets_) half_edges += f.vertices.size();
  return half_edges / 2;
}

double ConvexPolyhedron::max_signed_distance(const Plane& plane) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) m = std::max(m, plane.signed_distance(v));
  return m;
}

bool ConvexPolyhedron::clip(const Plane& plane, const NeighborTag& tag, double snap_tolerance) {
  if (empty()) return false;

  thread_local std::vector<double> dist;
  const std::size_t nv = vertices_.size();
  dist.resize(nv);
  double dmax = -std::numeric_limits<double>::infinity();
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nv; ++k) {
    double d = plane.signed_distance(vertices_[k]);
    if (std::abs(d) <= snap_tolerance) d = 0.0;
    dist[k] = d;
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  if (dmax <= 0.0) return false;
  if (dmin >= 0.0) {
    vertices_.clear();
    facets_.clear();
    return true;
  }

  thread_local std::vector<int> remap;
  remap.assign(nv, -1);
  std::vector<Vec3> out_vertices;
  out_vertices.reserve(nv + 8);
  thread_local std::vector<int> on_plane;
  on_plane.clear();
  for (std::size_t k = 0; k < nv; ++k) {
    if (dist[k] > 0.0) continue;
    remap[k] = static_cast<int>(out_vertices.size());
    if (dist[k] == 0.0) {
      out_vertices.push_back(vertices_[k] - plane.signed_distance(vertices_[k]) * plane.normal);
      on_plane.push_back(remap[k]);
    } else {
      out_vertices.push_back(vertices_[k]);
    }
  }

  // intersection vertices are shared by the two facets adjacent to a cut edge
  thread_local std::vector<std::pair<long long, int>> edge_vertex;
  edge_vertex.clear();
  auto cut_vertex = [&](int a, int b) {
    const long long key = a < b ? (static_cast<long long>(a) << 32) | b
                                : (static_cast<long long>(b) << 32) | a;
    for (const auto& [k, idx] : edge_vertex)
      if (k == key) return idx;
    const double t = dist[a] / (dist[a] - dist[b]);
    Vec3 p = vertices_[a] + t * (vertices_[b] - vertices_[a]);
    p -= plane.signed_distance(p) * plane.normal;
    const int idx = static_cast<int>(out_vertices.size());
    out_vertices.push_back(p);
    on_plane.push_back(idx);
    edge_vertex.emplace_back(key, idx);
    return idx;
  };

  std::vector<Facet> out_facets;
  out_facets.reserve(facets_.size() + 1);
  for (auto& f : facets_) {
    const auto& fv = f.vertices;
    const std::size_t m = fv.size();
    bool any_out = false;
    for (int v : fv) any_out |= dist[v] > 0.0;
    if (!any_out) {
      for (int& v : f.vertices) v = remap[v];
      out_facets.push_back(std::move(f));
      continue;
    }
    std::vector<int> poly;
    poly.reserve(m + 1);
    for (std::size_t k = 0; k < m; ++k) {
      const int a = fv[k];
      const int b = fv[(k + 1) % m];
      if (dist[a] <= 0.0) poly.push_back(remap[a]);
      if ((dist[a] < 0.0 && dist[b] > 0.0) || (dist[a] > 0.0 && dist[b] < 0.0))
        poly.push_back(cut_vertex(a, b));
    }
    if (poly.size() >= 3) out_facets.push_back({std::move(poly), f.plane, f.neighbor});
  }

  std::sort(on_plane.begin(), on_plane.end());
  on_plane.erase(std::unique(on_plane.begin(), on_plane.end()), on_plane.end());
  if (on_plane.size() >= 3) {
    Vec3 centre = Vec3::Zero();
    for (int v : on_plane) centre += out_vertices[v];
    centre /= static_cast<double>(on_plane.size());
    Vec3 e1 = plane.normal.unitOrthogonal();
    Vec3 e2 = plane.normal.cross(e1);
    thread_local std::vector<std::pair<double, int>> by_angle;
    by_angle.clear();
    for (int v : on_plane) {
      const Vec3 r = out_vertices[v] - centre;
      by_angle.emplace_back(std::atan2(r.dot(e2), r.dot(e1)), v);
    }
    std::sort(by_angle.begin(), by_angle.end());
    std::vector<int> cap;
    cap.reserve(by_angle.size());
    for (const auto& [angle, v] : by_angle) cap.push_back(v);
    out_facets.push_back({std::move(cap), plane, tag});
  }

  vertices_ = std::move(out_vertices);
  facets_ = std::move(out_facets);
  if (facets_.size() < 4) {
    vertices_.clear();
    facets_.clear();
  }
  return true;
}

ConvexPolyhedron clip_by_halfspace(const ConvexPolyhedron& poly, const Plane& plane,
                                   const NeighborTag& tag, double snap_tolerance) {
  ConvexPolyhedron out = poly;
  out.clip(plane, tag, snap_tolerance);
  return out;
}

double facet_area(const ConvexPolyhedron& poly, const Facet& facet) {
  const auto& v = poly.vertices();
  const auto& fv = facet.vertices;
  Vec3 sum = Vec3::Zero();
  const Vec3& o = v[fv[0]];
  for (std::size_t k = 1; k + 1 < fv.size(); ++k)
    sum += (v[fv[k]] - o).cross(v[fv[k + 1]] - o);
  return 0.5 * sum.norm();
}

namespace {

Vec3 vertex_mean(const ConvexPolyhedron& poly) {
  Vec3 c = Vec3::Zero();
  for (const auto& v : poly.vertices()) c += v;
  return c / static_cast<double>(poly.vertices().size());
}

// Calls fn(a, b, c, signed_volume) for each tetrahedron (apex, a, b, c) of the
// fan decomposition, with a, b, c relative to the apex.
template <typename Fn>
void for_each_tetrahedron(const ConvexPolyhedron& poly, const Vec3& apex, Fn&& fn) {
  const auto& v = poly.vertices();
  for (const auto& f : poly.facets()) {
    const auto& fv = f.vertices;
    const Vec3 a = v[fv[0]] - apex;
    for (std::size_t k = 1; k + 1 < fv.size(); ++k) {
      const Vec3 b = v[fv[k]] - apex;
      const Vec3 c = v[fv[k + 1]] - apex;
      fn(a, b, c, a.dot(b.cross(c)) / 6.0);
    }
  }
}

}  // namespace

PolyhedronMeasures polyhedron_measures(const ConvexPolyhedron& poly) {
  if (poly.empty()) throw Error(ErrorCode::EmptyCell, "empty cell");
  PolyhedronMeasures m;
  const Vec3 apex = vertex_mean(poly);
  Vec3 first_moment = Vec3::Zero();
  for_each_tetrahedron(poly, apex, [&](const Vec3& a, const Vec3& b, const Vec3& c, double vol) {
    m.volume += vol;
    first_moment += vol * (a + b + c) / 4.0;
  });
  m.centroid = m.volume > 0.0 ? Vec3(apex + first_moment / m.volume) : apex;
  m.facet_areas.reserve(poly.facets().size());
  for (const auto& f : poly.facets()) m.facet_areas.push_back(facet_area(poly, f));
  return m;
}

double second_moment(const ConvexPolyhedron& poly, const Vec3& point) {
  if (poly.empty()) return 0.0;
  const Vec3 apex = vertex_mean(poly);
  const Vec3 o = apex - point;
  double total = 0.0;
  // For a tetrahedron with vertices p_k (relative to `point`) and volume V:
  // integral of |x|^2 = V/20 * (sum |p_k|^2 + |sum p_k|^2).
  for_each_tetrahedron(poly, apex, [&](const Vec3& a, const Vec3& b, const Vec3& c, double vol) {
    const Vec3 pa = a + o, pb = b + o, pc = c + o;
    const Vec3 s = o + pa + pb + pc;
    total += vol / 20.0 *
             (o.squaredNorm() + pa.squaredNorm() + pb.squaredNorm() + pc.squaredNorm() +
              s.squaredNorm());
  });
  return total;
}

}  // namespace rvegen
