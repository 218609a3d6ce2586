// Periodic Laguerre (power) tessellation of the fundamental cell.
//
// Each seed's cell is built in unwrapped form: the convex polyhedron of points
// in R^3 whose power distance to y_i is no larger than to any periodic image of
// any seed. Wrapping that polyhedron back into the box gives the periodic cell,
// so volumes, centroids and facet areas are measured on the unwrapped cell.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rvegen/geometry.hpp"

namespace rvegen {

/// Seed positions inside the box together with their weights.
class SeedSet {
 public:
  /// Validates that every seed lies strictly inside the box and that seeds are
  /// pairwise distinct (periodic distance >= 1e-9 * max(Li)).
  SeedSet(std::vector<Vec3> positions, Eigen::VectorXd weights, const Lattice& lat);
  SeedSet(std::vector<Vec3> positions, const Lattice& lat);

  /// Same positions, new weights. Skips the position checks.
  SeedSet with_weights(Eigen::VectorXd weights) const;

  int size() const { return static_cast<int>(positions_.size()); }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(int i) const { return positions_[i]; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Lattice& lattice() const { return lattice_; }

 private:
  SeedSet() = default;

  std::vector<Vec3> positions_;
  Eigen::VectorXd weights_;
  Lattice lattice_;
};

/// Minimum pairwise periodic distance allowed between seeds, relative to max(Li).
inline constexpr double kSeedSeparation = 1e-9;
/// Vertex snapping tolerance during clipping, relative to max(Li).
inline constexpr double kSnapTolerance = 1e-12;
/// Interfaces smaller than this (relative to max(Li)^2) are dropped.
inline constexpr double kMinInterfaceArea = 1e-14;

/// The bisecting plane of power distances between (y_i, w_i) and (y_other, w_other),
/// oriented so that the half-space keeps the points closer (in power) to y_i.
/// Throws Error(DegeneratePair) if the points coincide.
Plane radical_plane(const Vec3& y_i, double w_i, const Vec3& y_other, double w_other);

/// Unwrapped Laguerre cell of seed i. Facets are tagged with the neighbouring
/// seed index and the lattice shift of its image.
ConvexPolyhedron compute_cell(int i, const SeedSet& seeds);

/// One shared facet between cell i and the image y_j + shift of seed j.
struct Interface {
  int i = 0;
  int j = 0;
  Shift shift{0, 0, 0};
  double area = 0.0;
  double distance = 0.0;  // |y_i - (y_j + shift)|
};

struct LaguerreDiagram {
  std::vector<ConvexPolyhedron> cells;
  Eigen::VectorXd volumes;
  std::vector<Vec3> centroids;
  /// Sorted by (i, j, shift); every entry (i, j, u) has its mirror (j, i, -u).
  std::vector<Interface> interfaces;

  int size() const { return static_cast<int>(cells.size()); }
  double min_volume() const { return volumes.size() ? volumes.minCoeff() : 0.0; }
};

/// All cells, their measures and the interface table. Cells are built in parallel.
LaguerreDiagram compute_diagram(const SeedSet& seeds);

struct MonteCarloVolumes {
  Eigen::VectorXd volumes;
  Eigen::VectorXd standard_errors;
};

/// Volume estimates by assigning uniform samples of the box to the seed of least
/// periodic power distance (ties to the lowest index).
MonteCarloVolumes monte_carlo_volumes(const SeedSet& seeds, std::int64_t samples,
                                      std::uint64_t rng_seed);

}  // namespace rvegen
