// Property suites behind `rvegen validate`: finite-difference checks of the
// derivatives, partition sums, interface symmetry and the Monte Carlo volume
// oracle.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rvegen/sdot.hpp"

namespace rvegen::validate {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Random seeds with random weights such that every cell has volume above
/// 1e-3 |V| / n, plus random targets summing to |V|.
struct Instance {
  SeedSet seeds;
  TargetMasses targets;
};
Instance random_instance(int n, const Lattice& lat, std::uint64_t rng_seed);

/// max_i |g_i - fd_i| / max_i |g_i|, fd by central differences of the Kantorovich value.
double gradient_fd_error(const SeedSet& seeds, const TargetMasses& m, double step);

struct HessianCheck {
  double fd_error = 0.0;      // see hessian_check
  double max_row_sum = 0.0;   // max_i |sum_j H_ij|
  double asymmetry = 0.0;     // max |H_ij - H_ji|
  double min_offdiagonal = 0.0;
};

/// Compares the interface-table Hessian with central differences of the
/// gradient; fd_error is max |H_ij - fd_ij| / |H_ij| (absolute error where
/// H_ij = 0). `flip_offdiagonal_sign` negates the off-diagonal entries before
/// comparing (mutation check).
HessianCheck hessian_check(const SeedSet& seeds, double step, bool flip_offdiagonal_sign = false);

/// |sum_i v_i - |V|| / |V|.
double partition_error(const LaguerreDiagram& diagram, const Lattice& lat);

/// Largest relative area mismatch between an interface and its mirror entry
/// (1 if a mirror is missing).
double mirror_error(const LaguerreDiagram& diagram);

/// Largest |v_i - mc_i| / se_i against the Monte Carlo oracle.
double monte_carlo_sigmas(const LaguerreDiagram& diagram, const SeedSet& seeds,
                          std::int64_t samples, std::uint64_t rng_seed);

enum class Level { Quick, Full };

struct Options {
  Level level = Level::Quick;
  std::uint64_t rng_seed = 1;
  bool flip_hessian_sign = false;
};

/// Runs every suite, printing one line per check to `log`.
std::vector<CheckResult> run(const Options& options, std::ostream& log);

}  // namespace rvegen::validate
