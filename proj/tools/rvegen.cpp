// rvegen: periodic Laguerre tessellations with prescribed cell volumes.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "rvegen/io.hpp"

namespace {

using namespace rvegen::cli;

void add_box_flags(CLI::App* app, double& lx, double& ly, double& lz) {
  app->add_option("--lx", lx, "box length along x")->check(CLI::PositiveNumber);
  app->add_option("--ly", ly, "box length along y")->check(CLI::PositiveNumber);
  app->add_option("--lz", lz, "box length along z")->check(CLI::PositiveNumber);
}

void add_distribution_flags(CLI::App* app, DistributionFlags& d) {
  app->add_option("--dp-ratio", d.dp_ratio, "DP volume ratio of large to small grains");
  app->add_option("--ln-location", d.ln_location,
                  "log-normal location (default: mean volume |V|/n)");
  app->add_option("--ln-scale", d.ln_scale, "log-normal scale (std. dev. of the log)");
  app->add_option("--targets-file", d.targets_file, "target volumes for --dist file");
}

void add_solver_flags(CLI::App* app, SolverFlags& s) {
  app->add_option("--eta", s.eta, "percentage volume tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iterations", s.max_iterations, "Newton iteration cap");
  app->add_option("--max-backtracking", s.max_backtracking, "backtracking cap per iteration");
  app->add_option("--linear-tol", s.linear_tolerance, "relative residual of the Newton solve");
}

int write_to(const std::string& path, auto&& run) {
  if (path.empty()) return run(std::cout);
  std::ofstream file(path);
  if (!file) throw rvegen::Error(rvegen::ErrorCode::Io, "cannot write " + path);
  return run(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic Laguerre tessellations with cells of prescribed volumes"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenerateConfig gen;
  std::string manifest_path;
  auto* generate = app.add_subcommand("generate", "generate an RVE and write diagram/stats/manifest");
  generate->add_option("--n", gen.n, "number of grains")->check(CLI::PositiveNumber);
  add_box_flags(generate, gen.lx, gen.ly, gen.lz);
  generate->add_option("--dist", gen.dist, "target volumes: sp, dp, lognormal or file")
      ->check(CLI::IsMember({"sp", "dp", "lognormal", "file"}));
  add_distribution_flags(generate, gen.dist_flags);
  add_solver_flags(generate, gen.solver);
  generate->add_option("--lloyd", gen.lloyd, "number of Lloyd regularization steps")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--rng-seed", gen.rng_seed, "random seed");
  generate->add_option("--seeds-file", gen.seeds_file, "initial seed positions (x y z per line)");
  generate->add_flag("--warm-start", gen.warm_start, "reuse weights across Lloyd rounds");
  auto* out_opt = generate->add_option("--out", gen.out, "output prefix");
  generate->add_option("--format", gen.formats, "json, csv and/or obj (repeatable)")
      ->check(CLI::IsMember({"json", "csv", "obj"}));
  generate->add_option("--from-manifest", manifest_path, "replay the configuration of a manifest");

  BenchConfig bench;
  auto* bench_cmd = app.add_subcommand("bench", "time damped Newton over random instances");
  bench_cmd->add_option("--sizes", bench.sizes, "grain counts")->delimiter(',');
  bench_cmd->add_option("--dists", bench.dists, "distributions")->delimiter(',')
      ->check(CLI::IsMember({"sp", "dp", "lognormal"}));
  bench_cmd->add_option("--repeats", bench.repeats, "runs per (n, dist)");
  add_box_flags(bench_cmd, bench.lx, bench.ly, bench.lz);
  add_distribution_flags(bench_cmd, bench.dist_flags);
  add_solver_flags(bench_cmd, bench.solver);
  bench_cmd->add_option("--rng-seed", bench.rng_seed, "random seed");
  bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");

  BacktrackConfig bt;
  auto* bt_cmd = app.add_subcommand("backtrack-study", "log backtracking steps per Newton iteration");
  bt_cmd->add_option("--n", bt.n, "number of grains")->check(CLI::PositiveNumber);
  bt_cmd->add_option("--repeats", bt.repeats, "number of runs");
  bt_cmd->add_option("--dist", bt.dist, "sp, dp, lognormal or file")
      ->check(CLI::IsMember({"sp", "dp", "lognormal", "file"}));
  add_box_flags(bt_cmd, bt.lx, bt.ly, bt.lz);
  add_distribution_flags(bt_cmd, bt.dist_flags);
  add_solver_flags(bt_cmd, bt.solver);
  bt_cmd->add_option("--seeds-file", bt.seeds_file, "fixed seed positions for every run");
  bt_cmd->add_option("--rng-seed", bt.rng_seed, "random seed");
  bt_cmd->add_option("--out", bt.out, "CSV path (default stdout)");

  ValidateConfig val;
  auto* val_cmd = app.add_subcommand("validate", "run the invariant and oracle suites");
  val_cmd->add_option("--level", val.level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  val_cmd->add_option("--rng-seed", val.rng_seed, "random seed");
  val_cmd->add_option("--inject-fault", val.inject_fault,
                      "mutation check: 'hessian-sign' flips the Hessian off-diagonals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*generate) {
      if (!manifest_path.empty()) {
        const std::string out = gen.out;
        gen = generate_config_from_json(rvegen::io::read_json(manifest_path).at("config"));
        if (out_opt->count() > 0) gen.out = out;
      } else if (gen.n < 1) {
        std::cerr << "generate: --n is required\n";
        return kUsage;
      }
      return cmd_generate(gen, std::cerr);
    }
    if (*bench_cmd)
      return write_to(bench.out, [&](std::ostream& o) { return cmd_bench(bench, o, std::cerr); });
    if (*bt_cmd)
      return write_to(bt.out, [&](std::ostream& o) { return cmd_backtrack_study(bt, o, std::cerr); });
    if (*val_cmd) return cmd_validate(val, std::cout);
  } catch (const rvegen::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
