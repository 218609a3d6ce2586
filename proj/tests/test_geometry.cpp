#include <random>

#include "doctest.h"

#include "rvegen/geometry.hpp"

using namespace rvegen;

namespace {

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

double tetra_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  Eigen::Matrix3d m;
  m << b - a, c - a, d - a;
  return std::abs(m.determinant()) / 6.0;
}

ConvexPolyhedron unit_cube() { return ConvexPolyhedron::box(Vec3::Constant(-0.5), Vec3::Constant(0.5)); }

}  // namespace

TEST_CASE("wrap_point examples") {
  const Lattice unit;
  CHECK((wrap_point({0.7, 0, 0}, unit) - Vec3(-0.3, 0, 0)).norm() < 1e-15);
  CHECK((wrap_point({-1.6, 0, 0}, unit) - Vec3(0.4, 0, 0)).norm() < 1e-15);
  CHECK(wrap_point({0.5, 0, 0}, unit).x() == -0.5);
  const Lattice box(2.0, 1.0, 4.0);
  const Vec3 w = wrap_point({1.5, -0.75, 9.0}, box);
  CHECK((w - Vec3(-0.5, 0.25, 1.0)).norm() < 1e-14);
}

TEST_CASE("wrap_point is idempotent and lands in the half-open box") {
  std::mt19937_64 rng(3);
  const Lattice lat(1.3, 0.7, 2.1);
  for (int t = 0; t < 2000; ++t) {
    const Vec3 x = random_vec(rng, 10.0);
    const Vec3 w = wrap_point(x, lat);
    for (int k = 0; k < 3; ++k) {
      CHECK(w[k] >= -lat.length(k) / 2);
      CHECK(w[k] < lat.length(k) / 2);
      const double turns = (x[k] - w[k]) / lat.length(k);
      CHECK(std::abs(turns - std::round(turns)) < 1e-9);
    }
    CHECK(wrap_point(w, lat) == w);
  }
}

TEST_CASE("periodic distance examples") {
  const Lattice unit;
  const auto d = periodic_sq_distance({0.4, 0, 0}, {-0.4, 0, 0}, unit);
  CHECK(d.sq_distance == doctest::Approx(0.04).epsilon(1e-12));
  // x - y - u with u = (1,0,0) is (-0.2, 0, 0)
  CHECK(d.shift == Shift{1, 0, 0});
  const auto e = periodic_sq_distance({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}, unit);
  CHECK(e.sq_distance == 0.0);
  CHECK(e.shift == Shift{0, 0, 0});
}

TEST_CASE("periodic distance: symmetry, lattice invariance, minimality") {
  std::mt19937_64 rng(5);
  const Lattice lat(1.0, 1.5, 0.8);
  for (int t = 0; t < 500; ++t) {
    const Vec3 x = random_vec(rng, 0.4), y = random_vec(rng, 0.4);
    const auto d = periodic_sq_distance(x, y, lat);
    CHECK(d.sq_distance == doctest::Approx(periodic_sq_distance(y, x, lat).sq_distance).epsilon(1e-12));
    const Shift v{static_cast<int>(rng() % 5) - 2, static_cast<int>(rng() % 5) - 2,
                  static_cast<int>(rng() % 5) - 2};
    CHECK(periodic_sq_distance(x + lat.shift_vector(v), y, lat).sq_distance ==
          doctest::Approx(d.sq_distance).epsilon(1e-9));
    CHECK((x - y - lat.shift_vector(d.shift)).squaredNorm() ==
          doctest::Approx(d.sq_distance).epsilon(1e-12));
    // brute force over the 27 neighbouring shifts
    double best = 1e300;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c)
          best = std::min(best, (x - y - lat.shift_vector({a, b, c})).squaredNorm());
    CHECK(d.sq_distance == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("clip examples on the unit cube") {
  const NeighborTag tag{7, {0, 0, 0}};
  const auto half = clip_by_halfspace(unit_cube(), {Vec3::UnitX(), 0.0}, tag, 1e-12);
  const auto m = polyhedron_measures(half);
  CHECK(m.volume == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.centroid.x() == doctest::Approx(-0.25).epsilon(1e-14));
  int tagged = 0;
  for (const auto& f : half.facets()) tagged += f.neighbor == tag;
  CHECK(tagged == 1);

  ConvexPolyhedron same = unit_cube();
  CHECK_FALSE(same.clip({Vec3::UnitX(), 1.0}, tag, 1e-12));
  CHECK(polyhedron_measures(same).volume == doctest::Approx(1.0).epsilon(1e-15));

  ConvexPolyhedron gone = unit_cube();
  gone.clip({Vec3::UnitX(), -1.0}, tag, 1e-12);
  CHECK(gone.empty());
  CHECK_THROWS_AS(polyhedron_measures(gone), Error);
  CHECK(second_moment(gone, Vec3::Zero()) == 0.0);
}

TEST_CASE("measures of boxes and tetrahedra") {
  const auto cube = polyhedron_measures(unit_cube());
  CHECK(cube.volume == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cube.centroid.norm() < 1e-15);
  REQUIRE(cube.facet_areas.size() == 6);
  for (double a : cube.facet_areas) CHECK(a == doctest::Approx(1.0).epsilon(1e-15));
  // box moment about its centre: V (a^2 + b^2 + c^2) / 12
  CHECK(second_moment(unit_cube(), Vec3::Zero()) == doctest::Approx(0.25).epsilon(1e-14));

  const auto slab = ConvexPolyhedron::box({0, 0, 0}, {2, 1, 1});
  const auto s = polyhedron_measures(slab);
  CHECK(s.volume == doctest::Approx(2.0).epsilon(1e-15));
  CHECK((s.centroid - Vec3(1, 0.5, 0.5)).norm() < 1e-14);
  CHECK(second_moment(slab, s.centroid) == doctest::Approx(2.0 * (4 + 1 + 1) / 12.0).epsilon(1e-13));

  // random tetrahedra cut out of a big box by four planes
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    std::array<Vec3, 4> p;
    for (auto& q : p) q = random_vec(rng, 1.0);
    const double det_volume = tetra_volume(p[0], p[1], p[2], p[3]);
    if (det_volume < 1e-3) continue;
    ConvexPolyhedron poly = ConvexPolyhedron::box(Vec3::Constant(-2), Vec3::Constant(2));
    for (int k = 0; k < 4; ++k) {
      const Vec3& a = p[(k + 1) % 4];
      const Vec3& b = p[(k + 2) % 4];
      const Vec3& c = p[(k + 3) % 4];
      Vec3 n = (b - a).cross(c - a);
      if (n.dot(p[k] - a) > 0) n = -n;
      poly.clip(Plane::from_unnormalized(n, n.dot(a)), NeighborTag{k, {0, 0, 0}}, 1e-12);
    }
    const auto m = polyhedron_measures(poly);
    CHECK(m.volume == doctest::Approx(det_volume).epsilon(1e-10));
    CHECK((m.centroid - (p[0] + p[1] + p[2] + p[3]) / 4).norm() < 1e-10);
    CHECK(poly.vertices().size() == 4);
  }
}

TEST_CASE("axis cut keeps the expected fraction") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 200; ++t) {
    const int axis = static_cast<int>(rng() % 3);
    const double c = u(rng);
    Vec3 n = Vec3::Zero();
    n[axis] = 1.0;
    const auto cut = clip_by_halfspace(unit_cube(), {n, c}, NeighborTag{0, {0, 0, 0}}, 1e-12);
    CHECK(polyhedron_measures(cut).volume == doctest::Approx(c + 0.5).epsilon(1e-12));
  }
}

TEST_CASE("random clip sequences: monotone volume, half-spaces respected, Euler formula") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    ConvexPolyhedron poly = unit_cube();
    std::vector<Plane> planes;
    double previous = 1.0;
    for (int k = 0; k < 12; ++k) {
      const Vec3 dir = random_vec(rng, 1.0).normalized();
      const Plane plane{dir, std::uniform_real_distribution<double>(0.05, 0.6)(rng)};
      poly.clip(plane, NeighborTag{k, {0, 0, 0}}, 1e-12);
      planes.push_back(plane);
      if (poly.empty()) break;
      const double v = polyhedron_measures(poly).volume;
      CHECK(v <= previous + 1e-14);
      previous = v;
      for (const auto& q : planes) CHECK(poly.max_signed_distance(q) <= 1e-12);
      const auto V = static_cast<long>(poly.vertices().size());
      const auto E = static_cast<long>(poly.edge_count());
      const auto F = static_cast<long>(poly.facets().size());
      CHECK(V - E + F == 2);
    }
  }
}
