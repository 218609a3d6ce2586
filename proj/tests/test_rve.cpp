#include <algorithm>

#include "doctest.h"

#include "rvegen/rve.hpp"

using namespace rvegen;

namespace {

std::vector<Vec3> half_lattice() {
  std::vector<Vec3> pts;
  for (double x : {-0.25, 0.25})
    for (double y : {-0.25, 0.25})
      for (double z : {-0.25, 0.25}) pts.emplace_back(x, y, z);
  return pts;
}

}  // namespace

TEST_CASE("single-phase targets") {
  const Lattice lat(2, 1, 1);
  const auto m = sample_targets({10, SinglePhase{}}, lat, 1);
  for (int i = 0; i < 10; ++i) CHECK(m[i] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("dual-phase targets") {
  const Lattice unit;
  const auto m = sample_targets({4, DualPhase{}}, unit, 3);
  std::vector<double> v(m.values().begin(), m.values().end());
  std::sort(v.begin(), v.end());
  CHECK(v[0] == doctest::Approx(1.0 / 12).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(1.0 / 12).epsilon(1e-14));
  CHECK(v[2] == doctest::Approx(5.0 / 12).epsilon(1e-14));
  CHECK(v[3] == doctest::Approx(5.0 / 12).epsilon(1e-14));
  CHECK_THROWS_AS(sample_targets({5, DualPhase{}}, unit, 3), Error);
  // the large grains are not always the same ones
  const auto other = sample_targets({40, DualPhase{}}, unit, 4);
  const auto again = sample_targets({40, DualPhase{}}, unit, 5);
  CHECK((other.values() - again.values()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("log-normal targets") {
  const Lattice lat(2, 2, 2);
  const auto m = sample_targets({2000, LogNormal{}}, lat, 9);
  CHECK(m.values().sum() == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(m.values().minCoeff() > 0.0);
  // the log of the volumes has the requested spread
  const Eigen::ArrayXd logs = m.values().array().log();
  const double mean = logs.mean();
  const double sd = std::sqrt((logs - mean).square().sum() / (logs.size() - 1));
  CHECK(sd == doctest::Approx(0.5).epsilon(0.05));
  CHECK_THROWS_AS(sample_targets({3, ExplicitVolumes{{1, 2}}}, lat, 1), Error);
}

TEST_CASE("seed sampling is deterministic, interior and uniform") {
  const Lattice lat(1.0, 2.0, 0.5);
  const auto a = sample_seeds(10000, lat, 42);
  const auto b = sample_seeds(10000, lat, 42);
  const auto c = sample_seeds(10000, lat, 43);
  CHECK(a == b);
  CHECK(a != c);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : a) {
    CHECK(lat.contains_strictly(p));
    mean += p;
  }
  mean /= 10000.0;
  // per-axis std. dev. of a uniform coordinate is L / sqrt(12)
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(mean[k]) < 4 * lat.length(k) / std::sqrt(12.0) / 100.0);
}

TEST_CASE("Lloyd step fixed points") {
  const Lattice unit;
  const auto pts = half_lattice();
  const auto next = lloyd_step(compute_diagram(SeedSet(pts, unit)), unit);
  for (int i = 0; i < 8; ++i) CHECK((next[i] - pts[i]).norm() < 1e-12);

  const SeedSet one({{0.3, -0.1, 0.2}}, unit);
  CHECK((lloyd_step(compute_diagram(one), unit)[0] - one.position(0)).norm() < 1e-12);
}

TEST_CASE("Lloyd step returns interior points near the cells") {
  const Lattice lat(1.0, 1.0, 2.0);
  const SeedSet seeds(sample_seeds(200, lat, 7), lat);
  const auto diagram = compute_diagram(seeds);
  const auto next = lloyd_step(diagram, lat);
  for (int i = 0; i < 200; ++i) {
    CHECK(lat.contains_strictly(next[i]));
    CHECK(periodic_sq_distance(next[i], diagram.centroids[i], lat).sq_distance < 1e-20);
  }
}

TEST_CASE("generate_rve with explicit seeds and volumes") {
  const Lattice unit;
  RveOptions opt;
  opt.initial_seeds = std::vector<Vec3>{{-0.25, 0, 0}, {0.25, 0, 0}};
  opt.solver.eta = 0.01;
  const auto r = generate_rve({2, ExplicitVolumes{{3, 7}}}, unit, opt);
  REQUIRE(r.reports.size() == 1);
  CHECK(r.reports[0].newton_iterations() == 1);
  CHECK(r.diagram.volumes[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.seeds.weights()[0] - r.seeds.weights()[1] == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(r.lloyd_displacements.empty());
}

TEST_CASE("generate_rve on the half lattice needs no Newton steps") {
  const Lattice unit;
  RveOptions opt;
  opt.initial_seeds = half_lattice();
  opt.lloyd_steps = 2;
  const auto r = generate_rve({8, SinglePhase{}}, unit, opt);
  REQUIRE(r.reports.size() == 2);
  for (const auto& rep : r.reports) CHECK(rep.newton_iterations() == 0);
  for (double d : r.lloyd_displacements) CHECK(d < 1e-12);
  CHECK(r.seeds.weights().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generate_rve is deterministic and meets eta after every round") {
  const Lattice lat(1.0, 1.0, 1.0);
  RveOptions opt;
  opt.lloyd_steps = 3;
  opt.rng_seed = 11;
  const VolumeSpec spec{300, LogNormal{}};
  const auto a = generate_rve(spec, lat, opt);
  const auto b = generate_rve(spec, lat, opt);
  CHECK(a.seeds.positions() == b.seeds.positions());
  CHECK(a.seeds.weights() == b.seeds.weights());
  CHECK(a.reports.size() == 3);
  for (const auto& rep : a.reports) CHECK(rep.iterations.back().percent_error < 1.0);
  // Lloyd rounds move the seeds less and less
  REQUIRE(a.lloyd_displacements.size() == 3);
  CHECK(a.lloyd_displacements[2] < a.lloyd_displacements[0]);
  CHECK(mass_error(a.diagram, a.targets).percent < 1.0);

  opt.warm_start = true;
  const auto warm = generate_rve(spec, lat, opt);
  CHECK(mass_error(warm.diagram, warm.targets).percent < 1.0);
}
