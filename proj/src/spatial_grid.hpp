// Uniform bucket grid over the fundamental cell, addressed with unwrapped
// bucket indices so that a bucket outside [0, dims) stands for a periodic image.

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "rvegen/geometry.hpp"

namespace rvegen::detail {

class SpatialGrid {
 public:
  using Index = std::array<int, 3>;

  SpatialGrid(const std::vector<Vec3>& points, const Lattice& lat, double per_bucket)
      : lattice_(lat) {
    const double n = std::max<double>(1.0, static_cast<double>(points.size()));
    const double target = std::cbrt(lat.volume() * per_bucket / n);
    for (int k = 0; k < 3; ++k) {
      dims_[k] = std::max(1, static_cast<int>(std::floor(lat.length(k) / target)));
      width_[k] = lat.length(k) / dims_[k];
    }
    const int total = dims_[0] * dims_[1] * dims_[2];
    start_.assign(total + 1, 0);
    std::vector<int> owner(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      owner[p] = flat(bucket_of(points[p]));
      ++start_[owner[p] + 1];
    }
    for (int b = 0; b < total; ++b) start_[b + 1] += start_[b];
    items_.resize(points.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t p = 0; p < points.size(); ++p) items_[fill[owner[p]]++] = static_cast<int>(p);
  }

  const Index& dims() const { return dims_; }
  const Vec3& width() const { return width_; }

  Index bucket_of(const Vec3& p) const {
    Index b;
    for (int k = 0; k < 3; ++k) {
      const int c = static_cast<int>(std::floor((p[k] + 0.5 * lattice_.length(k)) / width_[k]));
      b[k] = std::clamp(c, 0, dims_[k] - 1);
    }
    return b;
  }

  /// Calls fn(bucket_lo, bucket_hi, shift, items_begin, items_end) for every
  /// unwrapped bucket at Chebyshev distance exactly `ring` from `centre`.
  template <typename Fn>
  void for_each_in_ring(const Index& centre, int ring, Fn&& fn) const {
    for (int dx = -ring; dx <= ring; ++dx)
      for (int dy = -ring; dy <= ring; ++dy)
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          const Index u{centre[0] + dx, centre[1] + dy, centre[2] + dz};
          Index wrapped;
          Shift shift;
          Vec3 lo;
          for (int k = 0; k < 3; ++k) {
            shift[k] = floor_div(u[k], dims_[k]);
            wrapped[k] = u[k] - shift[k] * dims_[k];
            lo[k] = -0.5 * lattice_.length(k) + u[k] * width_[k];
          }
          const int b = flat(wrapped);
          fn(lo, Vec3(lo + width_), shift, items_.data() + start_[b], items_.data() + start_[b + 1]);
        }
  }

  /// Lower bound on the distance from any point of the centre bucket to any
  /// point of a bucket in ring `ring` or beyond.
  double ring_lower_bound(int ring) const { return std::max(0, ring - 1) * width_.minCoeff(); }

  /// Largest ring that still contains a bucket with lattice shifts in [-limit, limit].
  int last_ring_within_shift(const Index& centre, int limit) const {
    int ring = 0;
    for (int k = 0; k < 3; ++k)
      ring = std::max({ring, centre[k] + limit * dims_[k], (limit + 1) * dims_[k] - 1 - centre[k]});
    return ring;
  }

 private:
  static int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
  int flat(const Index& b) const { return (b[0] * dims_[1] + b[1]) * dims_[2] + b[2]; }

  Lattice lattice_;
  Index dims_{1, 1, 1};
  Vec3 width_;
  std::vector<int> start_;
  std::vector<int> items_;
};

}  // namespace rvegen::detail
