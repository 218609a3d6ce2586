#include "rvegen/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "rvegen/parallel.hpp"
#include "spatial_grid.hpp"

namespace rvegen {

namespace {

// Largest lattice shift (per axis) an image may carry before a cell is declared
// pathological.
constexpr int kMaxImageShift = 2;
constexpr double kBucketOccupancy = 2.0;

void check_distinct(const std::vector<Vec3>& positions, const Lattice& lat) {
  const double tol = kSeedSeparation * lat.max_length();
  detail::SpatialGrid grid(positions, lat, kBucketOccupancy);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto centre = grid.bucket_of(positions[i]);
    for (int ring = 0; ring <= 1; ++ring) {
      grid.for_each_in_ring(centre, ring, [&](const Vec3&, const Vec3&, const Shift&,
                                              const int* begin, const int* end) {
        for (const int* it = begin; it != end; ++it) {
          if (static_cast<std::size_t>(*it) == i) continue;
          if (periodic_sq_distance(positions[i], positions[*it], lat).sq_distance < tol * tol) {
            std::ostringstream msg;
            msg << "seeds " << i << " and " << *it << " coincide";
            throw Error(ErrorCode::InvalidArgument, msg.str());
          }
        }
      });
    }
  }
}

double box_distance(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  double sq = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::max({0.0, lo[k] - p[k], p[k] - hi[k]});
    sq += d * d;
  }
  return std::sqrt(sq);
}

// Radius around y_i beyond which no image of weight <= w_max can cut the cell:
// an image at distance D cuts only if its radical plane lies closer than
// `reach` = max |x - y_i| over the cell, i.e. (D^2 + w_i - w_max) / (2D) < reach.
double security_radius(const ConvexPolyhedron& cell, const Vec3& y, double w_i, double w_max) {
  double reach_sq = 0.0;
  for (const auto& v : cell.vertices()) reach_sq = std::max(reach_sq, (v - y).squaredNorm());
  const double arg = reach_sq + w_max - w_i;
  if (arg < 0.0) return 0.0;
  return std::sqrt(reach_sq) + std::sqrt(arg);
}

struct Candidate {
  double power;
  int seed;
  Shift shift;
  Vec3 position;
};

class CellBuilder {
 public:
  explicit CellBuilder(const SeedSet& seeds)
      : seeds_(seeds),
        grid_(seeds.positions(), seeds.lattice(), kBucketOccupancy),
        w_max_(seeds.size() ? seeds.weights().maxCoeff() : 0.0),
        seed_min_(Vec3::Constant(std::numeric_limits<double>::infinity())),
        seed_max_(-seed_min_) {
    for (const auto& p : seeds.positions()) {
      seed_min_ = seed_min_.cwiseMin(p);
      seed_max_ = seed_max_.cwiseMax(p);
    }
  }

  ConvexPolyhedron build(int i) const {
    const Lattice& lat = seeds_.lattice();
    const Vec3& y = seeds_.position(i);
    const double w_i = seeds_.weights()[i];
    const double snap = kSnapTolerance * lat.max_length();

    const Vec3 half = 0.75 * lat.lengths();
    ConvexPolyhedron cell = ConvexPolyhedron::box(y - half, y + half);
    double radius = security_radius(cell, y, w_i, w_max_);
    double reach = std::sqrt((half).squaredNorm());

    const auto centre = grid_.bucket_of(y);
    const int last_ring = grid_.last_ring_within_shift(centre, kMaxImageShift);
    std::vector<Candidate> candidates;
    for (int ring = 0;; ++ring) {
      if (ring > last_ring) {
        if (!beyond_cap_is_safe(cell, y, w_i)) {
          std::ostringstream msg;
          msg << "cell may be cut by distant image (seed " << i << ")";
          throw Error(ErrorCode::DistantImage, msg.str());
        }
        break;
      }
      candidates.clear();
      grid_.for_each_in_ring(centre, ring, [&](const Vec3& lo, const Vec3& hi, const Shift& u,
                                               const int* begin, const int* end) {
        if (begin == end || box_distance(y, lo, hi) >= radius) return;
        for (int k = 0; k < 3; ++k)
          if (std::abs(u[k]) > kMaxImageShift) return;
        const Vec3 offset = lat.shift_vector(u);
        for (const int* it = begin; it != end; ++it) {
          const int j = *it;
          if (j == i && u == Shift{0, 0, 0}) continue;
          const Vec3 z = seeds_.position(j) + offset;
          candidates.push_back({(z - y).squaredNorm() - seeds_.weights()[j], j, u, z});
        }
      });
      std::sort(candidates.begin(), candidates.end(),
                [](const Candidate& a, const Candidate& b) {
                  return std::tie(a.power, a.seed, a.shift) < std::tie(b.power, b.seed, b.shift);
                });
      for (const auto& c : candidates) {
        const double dist = (c.position - y).norm();
        if (dist >= radius) continue;
        // distance from y to the radical plane, measured towards the image
        const double plane_offset = (dist * dist + w_i - seeds_.weights()[c.seed]) / (2.0 * dist);
        if (plane_offset >= reach) continue;
        const Plane plane = radical_plane(y, w_i, c.position, seeds_.weights()[c.seed]);
        if (cell.clip(plane, {c.seed, c.shift}, snap)) {
          if (cell.empty()) return cell;
          radius = security_radius(cell, y, w_i, w_max_);
          reach = 0.0;
          for (const auto& v : cell.vertices()) reach = std::max(reach, (v - y).squaredNorm());
          reach = std::sqrt(reach);
        }
      }
      if (grid_.ring_lower_bound(ring + 1) >= radius) break;
    }

    for (const auto& f : cell.facets()) {
      if (f.neighbor.is_boundary()) {
        std::ostringstream msg;
        msg << "cell " << i << " was not closed by any image";
        throw Error(ErrorCode::DistantImage, msg.str());
      }
    }
    return cell;
  }

 private:
  // Images with some |u_k| > kMaxImageShift are never enumerated. Along that
  // axis they sit at least `gap` away from the cell's bounding box, so their
  // power distance to any point of the cell is at least gap^2 - w_max; they
  // cannot cut if that exceeds the largest power distance from y_i.
  bool beyond_cap_is_safe(const ConvexPolyhedron& cell, const Vec3& y, double w_i) const {
    const Lattice& lat = seeds_.lattice();
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    double power = -std::numeric_limits<double>::infinity();
    for (const auto& v : cell.vertices()) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
      power = std::max(power, (v - y).squaredNorm() - w_i);
    }
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const double reach = (kMaxImageShift + 1) * lat.length(k);
      gap = std::min({gap, seed_min_[k] + reach - hi[k], lo[k] - (seed_max_[k] - reach)});
    }
    return gap > 0.0 && gap * gap - w_max_ >= power;
  }

  const SeedSet& seeds_;
  detail::SpatialGrid grid_;
  double w_max_;
  Vec3 seed_min_, seed_max_;
};

Shift negate(const Shift& u) { return {-u[0], -u[1], -u[2]}; }

}  // namespace

SeedSet::SeedSet(std::vector<Vec3> positions, Eigen::VectorXd weights, const Lattice& lat)
    : positions_(std::move(positions)), weights_(std::move(weights)), lattice_(lat) {
  if (positions_.empty()) throw Error(ErrorCode::InvalidArgument, "seed set is empty");
  if (weights_.size() != static_cast<Eigen::Index>(positions_.size()))
    throw Error(ErrorCode::InvalidArgument, "weight vector size does not match seed count");
  if (!weights_.allFinite()) throw Error(ErrorCode::InvalidArgument, "weights must be finite");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!lattice_.contains_strictly(positions_[i])) {
      std::ostringstream msg;
      msg << "seed " << i << " is not strictly inside the box";
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
  }
  check_distinct(positions_, lattice_);
}

SeedSet::SeedSet(std::vector<Vec3> positions, const Lattice& lat)
    : SeedSet(positions, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(positions.size())), lat) {}

SeedSet SeedSet::with_weights(Eigen::VectorXd weights) const {
  if (weights.size() != weights_.size())
    throw Error(ErrorCode::InvalidArgument, "weight vector size does not match seed count");
  if (!weights.allFinite()) throw Error(ErrorCode::InvalidArgument, "weights must be finite");
  SeedSet out;
  out.positions_ = positions_;
  out.weights_ = std::move(weights);
  out.lattice_ = lattice_;
  return out;
}

Plane radical_plane(const Vec3& y_i, double w_i, const Vec3& y_other, double w_other) {
  const Vec3 d = y_other - y_i;
  const double len = d.norm();
  if (!(len > 0.0)) throw Error(ErrorCode::DegeneratePair, "degenerate pair: coincident points");
  // |x-y_i|^2 - w_i <= |x-y_o|^2 - w_o  <=>  2 (x - y_i).d <= |d|^2 + w_i - w_o
  const Vec3 normal = d / len;
  return {normal, normal.dot(y_i) + (len * len + w_i - w_other) / (2.0 * len)};
}

ConvexPolyhedron compute_cell(int i, const SeedSet& seeds) {
  if (i < 0 || i >= seeds.size()) throw Error(ErrorCode::InvalidArgument, "seed index out of range");
  return CellBuilder(seeds).build(i);
}

LaguerreDiagram compute_diagram(const SeedSet& seeds) {
  const int n = seeds.size();
  const Lattice& lat = seeds.lattice();
  LaguerreDiagram diagram;
  diagram.cells.resize(n);
  diagram.volumes = Eigen::VectorXd::Zero(n);
  diagram.centroids.assign(n, Vec3::Zero());

  struct RawFacet {
    int j;
    Shift shift;
    double area;
  };
  std::vector<std::vector<RawFacet>> raw(n);
  const double min_area = kMinInterfaceArea * lat.max_length() * lat.max_length();

  const CellBuilder builder(seeds);
  parallel_for(n, [&](int i) {
    ConvexPolyhedron cell = builder.build(i);
    if (!cell.empty()) {
      const auto m = polyhedron_measures(cell);
      diagram.volumes[i] = m.volume;
      diagram.centroids[i] = m.centroid;
      for (std::size_t f = 0; f < cell.facets().size(); ++f) {
        if (m.facet_areas[f] < min_area) continue;
        const auto& tag = cell.facets()[f].neighbor;
        raw[i].push_back({tag.seed, tag.shift, m.facet_areas[f]});
      }
    } else {
      diagram.centroids[i] = seeds.position(i);
    }
    diagram.cells[i] = std::move(cell);
  });

  // Each shared facet is measured from both sides; merge into one area per
  // interface and emit both orientations.
  std::map<std::tuple<int, int, Shift>, double> areas;
  for (int i = 0; i < n; ++i)
    for (const auto& f : raw[i]) areas[{i, f.j, f.shift}] = f.area;
  for (const auto& [key, area] : areas) {
    const auto& [i, j, u] = key;
    const auto mirror = areas.find({j, i, negate(u)});
    const double merged = mirror == areas.end() ? area : 0.5 * (area + mirror->second);
    const Vec3 image = seeds.position(j) + lat.shift_vector(u);
    diagram.interfaces.push_back({i, j, u, merged, (seeds.position(i) - image).norm()});
    if (mirror == areas.end()) {
      const Vec3 back = seeds.position(i) + lat.shift_vector(negate(u));
      diagram.interfaces.push_back({j, i, negate(u), merged, (seeds.position(j) - back).norm()});
    }
  }
  std::sort(diagram.interfaces.begin(), diagram.interfaces.end(),
            [](const Interface& a, const Interface& b) {
              return std::tie(a.i, a.j, a.shift) < std::tie(b.i, b.j, b.shift);
            });
  return diagram;
}

MonteCarloVolumes monte_carlo_volumes(const SeedSet& seeds, std::int64_t samples,
                                      std::uint64_t rng_seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  const int n = seeds.size();
  const Lattice& lat = seeds.lattice();
  const Vec3 len = lat.lengths();

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<Vec3> points(static_cast<std::size_t>(samples));
  for (auto& p : points) p = Vec3(unit(rng) * len[0], unit(rng) * len[1], unit(rng) * len[2]);

  std::vector<int> owner(points.size());
  const auto& ys = seeds.positions();
  const Eigen::VectorXd& w = seeds.weights();
  constexpr int kBlock = 4096;
  const int blocks = static_cast<int>((samples + kBlock - 1) / kBlock);
  parallel_for(blocks, [&](int b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(points.size(), begin + kBlock);
    for (std::size_t s = begin; s < end; ++s) {
      const Vec3& x = points[s];
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int j = 0; j < n; ++j) {
        double c = 0.0;
        for (int k = 0; k < 3; ++k) {
          double d = x[k] - ys[j][k];
          d -= len[k] * std::nearbyint(d / len[k]);
          c += d * d;
        }
        c -= w[j];
        if (c < best) {
          best = c;
          arg = j;
        }
      }
      owner[s] = arg;
    }
  });

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  for (int o : owner) counts[o] += 1.0;
  MonteCarloVolumes out;
  const double total = static_cast<double>(samples);
  const Eigen::VectorXd p = counts / total;
  out.volumes = p * lat.volume();
  out.standard_errors =
      (p.array() * (1.0 - p.array()) / total).sqrt().matrix() * lat.volume();
  return out;
}

}  // namespace rvegen
