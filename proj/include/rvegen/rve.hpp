// Polycrystalline RVE pipeline: target volumes, random seeds, and alternating
// Lloyd regularization with volume-constrained weight solves.

#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "rvegen/sdot.hpp"

namespace rvegen {

/// All grains have volume |V|/n.
struct SinglePhase {};

/// Half the grains have volume x, the other half ratio * x.
struct DualPhase {
  double ratio = 5.0;
};

/// Volumes drawn from exp(N(location, scale^2)) and rescaled to sum to |V|.
/// Without an explicit location the mean volume is |V|/n.
struct LogNormal {
  std::optional<double> location;
  double scale = 0.5;
};

struct ExplicitVolumes {
  std::vector<double> volumes;
};

struct VolumeSpec {
  int n = 0;
  std::variant<SinglePhase, DualPhase, LogNormal, ExplicitVolumes> distribution;
};

TargetMasses sample_targets(const VolumeSpec& spec, const Lattice& lat, std::uint64_t rng_seed);

/// n distinct i.i.d. uniform points strictly inside the box.
std::vector<Vec3> sample_seeds(int n, const Lattice& lat, std::uint64_t rng_seed);

/// Centroids of the unwrapped cells, wrapped back into the box.
std::vector<Vec3> lloyd_step(const LaguerreDiagram& diagram, const Lattice& lat);

struct RveOptions {
  int lloyd_steps = 0;
  std::uint64_t rng_seed = 0;
  SolverConfig solver;
  bool warm_start = false;                       // reuse the previous weights between rounds
  std::optional<std::vector<Vec3>> initial_seeds;  // replaces random initialization
};

struct RveResult {
  SeedSet seeds;  // final positions and weights
  LaguerreDiagram diagram;
  std::vector<SolverReport> reports;  // one per Lloyd round, or a single solve without Lloyd
  TargetMasses targets;
  std::vector<double> lloyd_displacements;  // mean seed-to-centroid distance per round
};

RveResult generate_rve(const VolumeSpec& spec, const Lattice& lat, const RveOptions& options);

}  // namespace rvegen
