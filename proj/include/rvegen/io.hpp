// File formats: diagram JSON (canonical), per-grain statistics CSV, OBJ
// polygon soup, and plain-text seed / volume lists.

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rvegen/sdot.hpp"

namespace rvegen::io {

inline constexpr std::array<std::string_view, 8> kStatsColumns = {
    "grain", "volume", "target", "pct_error", "centroid_x", "centroid_y", "centroid_z", "faces"};

inline constexpr std::array<std::string_view, 13> kBenchColumns = {
    "n", "dist", "repeats", "failures", "time_mean_s", "time_median_s", "time_std_s",
    "newton_mean", "newton_median", "newton_std", "backtracks_mean", "backtracks_median",
    "backtracks_std"};

inline constexpr std::array<std::string_view, 6> kBacktrackColumns = {
    "run", "newton_iteration", "backtracking_steps", "mass_error", "pct_error", "seconds"};

/// Seeds, weights, targets and every cell with its vertex/facet lists and
/// neighbour tags.
nlohmann::json diagram_to_json(const SeedSet& seeds, const LaguerreDiagram& diagram,
                               const TargetMasses& targets);

struct DiagramFile {
  Lattice lattice;
  std::vector<Vec3> seeds;
  Eigen::VectorXd weights;
  Eigen::VectorXd targets;
  std::vector<ConvexPolyhedron> cells;
};

DiagramFile diagram_from_json(const nlohmann::json& j);

void write_stats_csv(std::ostream& out, const LaguerreDiagram& diagram, const TargetMasses& targets);

/// One OBJ object per cell, each facet a polygon.
void write_obj(std::ostream& out, const LaguerreDiagram& diagram);

/// Whitespace- or comma-separated "x y z" rows; blank lines and '#' comments skipped.
std::vector<Vec3> read_points(const std::string& path);

/// One value per row (or any whitespace/comma separated list).
std::vector<double> read_values(const std::string& path);

nlohmann::json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& contents);

}  // namespace rvegen::io
