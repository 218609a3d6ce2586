// Subcommands of the rvegen command-line tool.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rvegen/rve.hpp"

namespace rvegen::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kUsage = 1, kSolverFailure = 2, kValidationFailure = 3 };

/// Distribution parameters shared by generate, bench and backtrack-study.
struct DistributionFlags {
  double dp_ratio = 5.0;
  std::optional<double> ln_location;
  double ln_scale = 0.5;
  std::string targets_file;  // used by --dist file
};

struct SolverFlags {
  double eta = 1.0;
  int max_iterations = 100;
  int max_backtracking = 40;
  double linear_tolerance = 1e-11;

  SolverConfig config() const;
};

struct GenerateConfig {
  int n = 0;
  double lx = 1.0, ly = 1.0, lz = 1.0;
  std::string dist = "sp";
  DistributionFlags dist_flags;
  SolverFlags solver;
  int lloyd = 0;
  std::uint64_t rng_seed = 0;
  std::string seeds_file;
  bool warm_start = false;
  std::string out = "rve";
  std::vector<std::string> formats{"json", "csv"};
};

nlohmann::json to_json(const GenerateConfig& cfg);
GenerateConfig generate_config_from_json(const nlohmann::json& j);

/// Builds the volume specification for `dist` in {sp, dp, lognormal, file}.
VolumeSpec make_volume_spec(int n, const std::string& dist, const DistributionFlags& flags);

int cmd_generate(const GenerateConfig& cfg, std::ostream& log);

struct BenchConfig {
  std::vector<int> sizes{100};
  std::vector<std::string> dists{"sp"};
  int repeats = 100;
  double lx = 1.0, ly = 1.0, lz = 1.0;
  DistributionFlags dist_flags;
  SolverFlags solver;
  std::uint64_t rng_seed = 0;
  std::string out;  // CSV path; empty writes to stdout
};

int cmd_bench(const BenchConfig& cfg, std::ostream& out, std::ostream& log);

struct BacktrackConfig {
  int n = 1000;
  int repeats = 10;
  std::string dist = "lognormal";
  double lx = 1.0, ly = 1.0, lz = 1.0;
  DistributionFlags dist_flags;
  SolverFlags solver;
  std::string seeds_file;
  std::uint64_t rng_seed = 0;
  std::string out;
};

int cmd_backtrack_study(const BacktrackConfig& cfg, std::ostream& out, std::ostream& log);

struct ValidateConfig {
  std::string level = "quick";
  std::uint64_t rng_seed = 1;
  std::string inject_fault;  // "hessian-sign" flips the Hessian off-diagonals
};

int cmd_validate(const ValidateConfig& cfg, std::ostream& log);

/// Maps library error codes onto process exit codes.
int exit_code_for(ErrorCode code);

}  // namespace rvegen::cli
