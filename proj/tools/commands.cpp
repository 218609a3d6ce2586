#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "rvegen/io.hpp"
#include "rvegen/parallel.hpp"
#include "rvegen/validate.hpp"

namespace rvegen::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint32_t> parts) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(base),
                                   static_cast<std::uint32_t>(base >> 32)};
  words.insert(words.end(), parts);
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out;
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct Summary {
  double mean = 0.0, median = 0.0, stddev = 0.0;
};

Summary summarize(std::vector<double> v) {
  Summary s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
  return s;
}

void write_header(std::ostream& out, const auto& columns) {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
}

json report_json(const SolverReport& r) {
  json iterations = json::array();
  for (const auto& it : r.iterations) {
    iterations.push_back({{"iteration", it.iteration},
                          {"mass_error", it.mass_error},
                          {"pct_error", it.percent_error},
                          {"backtracking_steps", it.backtracking_steps},
                          {"kantorovich", it.kantorovich},
                          {"seconds_diagram", it.seconds_diagram},
                          {"seconds_hessian", it.seconds_hessian},
                          {"seconds_solve", it.seconds_solve},
                          {"seconds_total", it.seconds_total}});
  }
  return {{"epsilon", r.epsilon},
          {"converged", r.converged},
          {"newton_iterations", r.newton_iterations()},
          {"seconds_total", r.seconds_total},
          {"iterations", std::move(iterations)}};
}

// Seeds from a file are wrapped into the box so any periodic representative is accepted.
std::vector<Vec3> load_seeds(const std::string& path, const Lattice& lat) {
  auto pts = io::read_points(path);
  for (auto& p : pts) p = wrap_point(p, lat);
  return pts;
}

}  // namespace

SolverConfig SolverFlags::config() const {
  SolverConfig c;
  c.eta = eta;
  c.max_iterations = max_iterations;
  c.max_backtracking = max_backtracking;
  c.linear_tolerance = linear_tolerance;
  return c;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io:
    case ErrorCode::SeedSampling:
      return kUsage;
    default:
      return kSolverFailure;
  }
}

VolumeSpec make_volume_spec(int n, const std::string& dist, const DistributionFlags& flags) {
  if (dist == "sp") return {n, SinglePhase{}};
  if (dist == "dp") return {n, DualPhase{flags.dp_ratio}};
  if (dist == "lognormal") return {n, LogNormal{flags.ln_location, flags.ln_scale}};
  if (dist == "file") {
    if (flags.targets_file.empty())
      throw Error(ErrorCode::InvalidArgument, "--dist file requires --targets-file");
    return {n, ExplicitVolumes{io::read_values(flags.targets_file)}};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown distribution '" + dist + "'");
}

json to_json(const GenerateConfig& c) {
  json dist = {{"dp_ratio", c.dist_flags.dp_ratio},
               {"ln_scale", c.dist_flags.ln_scale},
               {"targets_file", c.dist_flags.targets_file}};
  dist["ln_location"] = c.dist_flags.ln_location ? json(*c.dist_flags.ln_location) : json(nullptr);
  return {{"n", c.n},
          {"lx", c.lx},
          {"ly", c.ly},
          {"lz", c.lz},
          {"dist", c.dist},
          {"distribution", std::move(dist)},
          {"eta", c.solver.eta},
          {"max_iterations", c.solver.max_iterations},
          {"max_backtracking", c.solver.max_backtracking},
          {"linear_tolerance", c.solver.linear_tolerance},
          {"lloyd", c.lloyd},
          {"rng_seed", c.rng_seed},
          {"seeds_file", c.seeds_file},
          {"warm_start", c.warm_start},
          {"out", c.out},
          {"formats", c.formats}};
}

GenerateConfig generate_config_from_json(const json& j) {
  try {
    GenerateConfig c;
    c.n = j.at("n").get<int>();
    c.lx = j.at("lx").get<double>();
    c.ly = j.at("ly").get<double>();
    c.lz = j.at("lz").get<double>();
    c.dist = j.at("dist").get<std::string>();
    const auto& d = j.at("distribution");
    c.dist_flags.dp_ratio = d.at("dp_ratio").get<double>();
    c.dist_flags.ln_scale = d.at("ln_scale").get<double>();
    c.dist_flags.targets_file = d.at("targets_file").get<std::string>();
    if (!d.at("ln_location").is_null()) c.dist_flags.ln_location = d.at("ln_location").get<double>();
    c.solver.eta = j.at("eta").get<double>();
    c.solver.max_iterations = j.at("max_iterations").get<int>();
    c.solver.max_backtracking = j.at("max_backtracking").get<int>();
    c.solver.linear_tolerance = j.at("linear_tolerance").get<double>();
    c.lloyd = j.at("lloyd").get<int>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.seeds_file = j.at("seeds_file").get<std::string>();
    c.warm_start = j.at("warm_start").get<bool>();
    c.out = j.at("out").get<std::string>();
    c.formats = j.at("formats").get<std::vector<std::string>>();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed manifest config: ") + e.what());
  }
}

int cmd_generate(const GenerateConfig& cfg, std::ostream& log) {
  const auto start = Clock::now();
  for (const auto& f : cfg.formats)
    if (f != "json" && f != "csv" && f != "obj")
      throw Error(ErrorCode::InvalidArgument, "unknown format '" + f + "'");
  const Lattice lat(cfg.lx, cfg.ly, cfg.lz);
  const VolumeSpec spec = make_volume_spec(cfg.n, cfg.dist, cfg.dist_flags);

  RveOptions options;
  options.lloyd_steps = cfg.lloyd;
  options.rng_seed = cfg.rng_seed;
  options.solver = cfg.solver.config();
  options.warm_start = cfg.warm_start;
  if (!cfg.seeds_file.empty()) options.initial_seeds = load_seeds(cfg.seeds_file, lat);

  log << "generating " << cfg.n << " grains (" << cfg.dist << "), " << cfg.lloyd
      << " Lloyd steps, eta " << cfg.solver.eta << "%\n";
  RveResult result = [&] {
    try {
      return generate_rve(spec, lat, options);
    } catch (const Error& e) {
      if (exit_code_for(e.code()) == kSolverFailure)
        throw Error(e.code(), std::string("solve stage: ") + e.what());
      throw;
    }
  }();
  const double solve_seconds = seconds_since(start);
  for (std::size_t r = 0; r < result.reports.size(); ++r) {
    const auto& rep = result.reports[r];
    log << "  solve " << r + (cfg.lloyd > 0 ? 1 : 0) << ": " << rep.newton_iterations()
        << " Newton iterations, " << rep.total_backtracking() << " backtracking steps, final error "
        << rep.iterations.back().percent_error << "%, " << rep.seconds_total << " s\n";
  }

  const auto export_start = Clock::now();
  const auto has = [&](const char* f) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), f) != cfg.formats.end();
  };
  if (has("json"))
    io::write_text(cfg.out + ".diagram.json",
                   io::diagram_to_json(result.seeds, result.diagram, result.targets).dump() + "\n");
  if (has("csv")) {
    std::ostringstream csv;
    io::write_stats_csv(csv, result.diagram, result.targets);
    io::write_text(cfg.out + ".stats.csv", csv.str());
  }
  if (has("obj")) {
    std::ostringstream obj;
    io::write_obj(obj, result.diagram);
    io::write_text(cfg.out + ".obj", obj.str());
  }
  const double export_seconds = seconds_since(export_start);

  json reports = json::array();
  json newton = json::array();
  for (const auto& rep : result.reports) {
    reports.push_back(report_json(rep));
    newton.push_back(rep.newton_iterations());
  }
  const MassError err = mass_error(result.diagram, result.targets);
  const char* threads_env = std::getenv("RVE_THREADS");
  json manifest = {
      {"software", {{"name", "rvegen"}, {"version", kVersion}}},
      {"command", "generate"},
      {"config", to_json(cfg)},
      {"environment", {{"RVE_THREADS", threads_env ? threads_env : ""}, {"workers", worker_count()}}},
      {"result",
       {{"newton_iterations", newton},
        {"max_pct_error", err.percent},
        {"lloyd_displacements", result.lloyd_displacements},
        {"reports", std::move(reports)}}},
      {"timings",
       {{"solve_s", solve_seconds}, {"export_s", export_seconds}, {"total_s", seconds_since(start)}}}};
  io::write_text(cfg.out + ".manifest.json", manifest.dump(2) + "\n");
  log << "max percentage error " << err.percent << "%, wrote " << cfg.out << ".*\n";
  return kSuccess;
}

int cmd_bench(const BenchConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.repeats < 1) throw Error(ErrorCode::InvalidArgument, "--repeats must be positive");
  const Lattice lat(cfg.lx, cfg.ly, cfg.lz);
  write_header(out, io::kBenchColumns);
  out << std::setprecision(10);
  for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
    for (std::size_t d = 0; d < cfg.dists.size(); ++d) {
      const int n = cfg.sizes[s];
      const VolumeSpec spec = make_volume_spec(n, cfg.dists[d], cfg.dist_flags);
      std::vector<double> times, iterations, backtracks;
      int failures = 0;
      for (int r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t seed = derive_seed(
            cfg.rng_seed, {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d),
                           static_cast<std::uint32_t>(r)});
        try {
          const TargetMasses m = sample_targets(spec, lat, seed);
          const SeedSet seeds(sample_seeds(n, lat, seed), lat);
          const auto t = Clock::now();
          const auto solved = damped_newton(seeds, m, Eigen::VectorXd::Zero(n), cfg.solver.config());
          times.push_back(seconds_since(t));
          iterations.push_back(solved.report.newton_iterations());
          backtracks.push_back(solved.report.total_backtracking());
        } catch (const Error& e) {
          ++failures;
          log << "  n=" << n << " " << cfg.dists[d] << " repeat " << r << " failed: " << e.what()
              << '\n';
        }
      }
      const auto ts = summarize(times), is = summarize(iterations), bs = summarize(backtracks);
      out << n << ',' << cfg.dists[d] << ',' << cfg.repeats << ',' << failures << ',' << ts.mean
          << ',' << ts.median << ',' << ts.stddev << ',' << is.mean << ',' << is.median << ','
          << is.stddev << ',' << bs.mean << ',' << bs.median << ',' << bs.stddev << '\n';
      log << "n=" << n << " " << cfg.dists[d] << ": mean " << ts.mean << " s over "
          << times.size() << " runs\n";
    }
  }
  return kSuccess;
}

int cmd_backtrack_study(const BacktrackConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.repeats < 1) throw Error(ErrorCode::InvalidArgument, "--repeats must be positive");
  const Lattice lat(cfg.lx, cfg.ly, cfg.lz);
  const VolumeSpec spec = make_volume_spec(cfg.n, cfg.dist, cfg.dist_flags);
  std::optional<std::vector<Vec3>> fixed_seeds;
  if (!cfg.seeds_file.empty()) fixed_seeds = load_seeds(cfg.seeds_file, lat);

  write_header(out, io::kBacktrackColumns);
  out << std::setprecision(10);
  int last_backtrack = 0;
  int failures = 0;
  for (int r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = derive_seed(cfg.rng_seed, {static_cast<std::uint32_t>(cfg.n),
                                                          static_cast<std::uint32_t>(r)});
    try {
      const TargetMasses m = sample_targets(spec, lat, seed);
      const SeedSet seeds(fixed_seeds ? *fixed_seeds : sample_seeds(cfg.n, lat, seed), lat);
      const auto solved =
          damped_newton(seeds, m, Eigen::VectorXd::Zero(cfg.n), cfg.solver.config());
      for (const auto& it : solved.report.iterations) {
        if (it.iteration == 0) continue;
        out << r << ',' << it.iteration << ',' << it.backtracking_steps << ',' << it.mass_error << ','
            << it.percent_error << ',' << it.seconds_total << '\n';
        if (it.backtracking_steps > 0) last_backtrack = std::max(last_backtrack, it.iteration);
      }
    } catch (const Error& e) {
      ++failures;
      log << "  run " << r << " failed: " << e.what() << '\n';
    }
  }
  log << "max Newton iteration with backtracking: " << last_backtrack << " (" << failures
      << " failed runs)\n";
  return kSuccess;
}

int cmd_validate(const ValidateConfig& cfg, std::ostream& log) {
  validate::Options options;
  if (cfg.level == "quick") {
    options.level = validate::Level::Quick;
  } else if (cfg.level == "full") {
    options.level = validate::Level::Full;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--level must be quick or full");
  }
  if (!cfg.inject_fault.empty()) {
    if (cfg.inject_fault != "hessian-sign")
      throw Error(ErrorCode::InvalidArgument, "unknown fault '" + cfg.inject_fault + "'");
    options.flip_hessian_sign = true;
  }
  options.rng_seed = cfg.rng_seed;
  const auto results = validate::run(options, log);
  for (const auto& r : results) {
    if (!r.passed) {
      log << "validation failed: " << r.name << '\n';
      return kValidationFailure;
    }
  }
  log << "all " << results.size() << " checks passed\n";
  return kSuccess;
}

}  // namespace rvegen::cli
