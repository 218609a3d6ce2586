#include "rvegen/rve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_set>

namespace rvegen {

namespace {

// Independent random streams derived from the user's seed.
enum Stream : std::uint64_t { kTargets = 1, kSeeds = 2 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

struct KeyHash {
  std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
    return h;
  }
};

}  // namespace

TargetMasses sample_targets(const VolumeSpec& spec, const Lattice& lat, std::uint64_t rng_seed) {
  const int n = spec.n;
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one grain");
  auto rng = make_rng(rng_seed, kTargets);
  Eigen::VectorXd m(n);

  std::visit(
      [&](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, SinglePhase>) {
          m.setConstant(lat.volume() / n);
        } else if constexpr (std::is_same_v<T, DualPhase>) {
          if (n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "DP requires even n");
          if (!(dist.ratio > 0.0)) throw Error(ErrorCode::InvalidArgument, "DP ratio must be positive");
          // n/2 grains of volume x and n/2 of volume ratio*x
          const double x = lat.volume() / (0.5 * n * (1.0 + dist.ratio));
          std::vector<int> large(n, 0);
          std::fill(large.begin() + n / 2, large.end(), 1);
          std::shuffle(large.begin(), large.end(), rng);
          for (int i = 0; i < n; ++i) m[i] = large[i] ? dist.ratio * x : x;
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          if (!(dist.scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "log-normal scale must be positive");
          const double location =
              dist.location.value_or(std::log(lat.volume() / n) - 0.5 * dist.scale * dist.scale);
          std::lognormal_distribution<double> draw(location, dist.scale);
          for (int i = 0; i < n; ++i) m[i] = draw(rng);
        } else {
          if (static_cast<int>(dist.volumes.size()) != n)
            throw Error(ErrorCode::InvalidArgument, "explicit volume count differs from n");
          for (int i = 0; i < n; ++i) m[i] = dist.volumes[i];
        }
      },
      spec.distribution);
  return TargetMasses(std::move(m), lat);
}

std::vector<Vec3> sample_seeds(int n, const Lattice& lat, std::uint64_t rng_seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one seed");
  auto rng = make_rng(rng_seed, kSeeds);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);

  // Points closer than the separation tolerance land in the same or adjacent
  // key cells; key indices wrap so that the check is periodic.
  const double tol = kSeedSeparation * lat.max_length();
  std::array<std::int64_t, 3> keys_per_axis;
  for (int k = 0; k < 3; ++k)
    keys_per_axis[k] = std::max<std::int64_t>(1, static_cast<std::int64_t>(lat.length(k) / tol));
  std::unordered_set<std::array<std::int64_t, 3>, KeyHash> taken;
  auto key_of = [&](const Vec3& p) {
    std::array<std::int64_t, 3> key;
    for (int k = 0; k < 3; ++k)
      key[k] = static_cast<std::int64_t>(std::floor((p[k] / lat.length(k) + 0.5) * keys_per_axis[k]));
    return key;
  };

  std::vector<Vec3> out;
  out.reserve(n);
  const long long max_attempts = 100LL * n;
  for (long long attempt = 0; static_cast<int>(out.size()) < n; ++attempt) {
    if (attempt >= max_attempts)
      throw Error(ErrorCode::SeedSampling, "could not place distinct seeds inside the box");
    const Vec3 p(unit(rng) * lat.length(0), unit(rng) * lat.length(1), unit(rng) * lat.length(2));
    if (!lat.contains_strictly(p)) continue;
    const auto key = key_of(p);
    bool clash = false;
    for (int dx = -1; dx <= 1 && !clash; ++dx)
      for (int dy = -1; dy <= 1 && !clash; ++dy)
        for (int dz = -1; dz <= 1 && !clash; ++dz) {
          std::array<std::int64_t, 3> nb{key[0] + dx, key[1] + dy, key[2] + dz};
          for (int k = 0; k < 3; ++k) nb[k] = (nb[k] % keys_per_axis[k] + keys_per_axis[k]) % keys_per_axis[k];
          clash = taken.count(nb) > 0;
        }
    if (clash) continue;
    taken.insert(key);
    out.push_back(p);
  }
  return out;
}

std::vector<Vec3> lloyd_step(const LaguerreDiagram& diagram, const Lattice& lat) {
  std::vector<Vec3> out(diagram.size());
  for (int i = 0; i < diagram.size(); ++i) {
    if (!(diagram.volumes[i] > 0.0)) {
      std::ostringstream msg;
      msg << "empty cell " << i << " in Lloyd step";
      throw Error(ErrorCode::EmptyCell, msg.str());
    }
    Vec3 p = wrap_point(diagram.centroids[i], lat);
    // the half-open wrap can return the lower face, which is not interior
    for (int k = 0; k < 3; ++k)
      if (p[k] <= -0.5 * lat.length(k)) p[k] = std::nextafter(p[k], 0.0);
    out[i] = p;
  }
  return out;
}

RveResult generate_rve(const VolumeSpec& spec, const Lattice& lat, const RveOptions& options) {
  if (options.lloyd_steps < 0) throw Error(ErrorCode::InvalidArgument, "Lloyd steps must be >= 0");
  TargetMasses targets = sample_targets(spec, lat, options.rng_seed);
  std::vector<Vec3> positions;
  if (options.initial_seeds) {
    positions = *options.initial_seeds;
    if (static_cast<int>(positions.size()) != spec.n)
      throw Error(ErrorCode::InvalidArgument, "initial seed count differs from n");
  } else {
    positions = sample_seeds(spec.n, lat, options.rng_seed);
  }

  const int n = spec.n;
  SeedSet seeds(positions, lat);
  std::vector<SolverReport> reports;
  std::vector<double> displacements;

  auto solve = [&](const SeedSet& s, const Eigen::VectorXd& w0, int round) {
    try {
      return damped_newton(s, targets, w0, options.solver);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "Lloyd round " << round << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
  };

  if (options.lloyd_steps == 0) {
    NewtonResult solved = solve(seeds, Eigen::VectorXd::Zero(n), 0);
    reports.push_back(std::move(solved.report));
    return {seeds.with_weights(solved.weights), std::move(solved.diagram), std::move(reports),
            std::move(targets), std::move(displacements)};
  }

  // w = 0 gives the Voronoi diagram of the random seeds
  LaguerreDiagram diagram = compute_diagram(seeds);
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(n);
  for (int round = 1; round <= options.lloyd_steps; ++round) {
    double moved = 0.0;
    for (int i = 0; i < n; ++i) moved += (diagram.centroids[i] - seeds.position(i)).norm();
    displacements.push_back(moved / n);

    std::vector<Vec3> next;
    try {
      next = lloyd_step(diagram, lat);
      seeds = SeedSet(std::move(next), lat);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "Lloyd round " << round << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
    const Eigen::VectorXd w0 = options.warm_start ? weights : Eigen::VectorXd::Zero(n);
    NewtonResult solved = solve(seeds, w0, round);
    weights = solved.weights;
    diagram = std::move(solved.diagram);
    reports.push_back(std::move(solved.report));
  }
  return {seeds.with_weights(weights), std::move(diagram), std::move(reports), std::move(targets),
          std::move(displacements)};
}

}  // namespace rvegen
