// Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "oracles.hpp"
#include "rvegen/rve.hpp"

using namespace rvegen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.passed) ++failures;
  std::printf("[%s] %d. %s: %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", id, title, o.detail.c_str(),
              seconds_since(start));
  std::fflush(stdout);
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream fields(line);
    for (std::string f; std::getline(fields, f, ',');) row.push_back(f);
    rows.push_back(row);
  }
  return rows;
}

const Lattice kUnit;

// Ten random weighted instances shared by the derivative checks.
std::vector<SeedSet> derivative_instances() {
  std::vector<SeedSet> out;
  for (int k = 0; k < 10; ++k) out.push_back(oracle::random_weighted(k % 2 ? 20 : 5, kUnit, 1000 + k));
  return out;
}

std::vector<SolverReport> convergence_reports;

}  // namespace

int main() {
  criterion(1, "two-seed analytic solve", [] {
    const SeedSet seeds({{-0.25, 0, 0}, {0.25, 0, 0}}, kUnit);
    const TargetMasses m(Eigen::Vector2d(0.3, 0.7), kUnit);
    SolverConfig cfg;
    cfg.eta = 0.01;
    const auto t = Clock::now();
    const auto r = damped_newton(seeds, m, Eigen::Vector2d::Zero(), cfg);
    const double secs = seconds_since(t);
    const double dw = r.weights[0] - r.weights[1];
    bool no_backtracking = true;
    for (const auto& it : r.report.iterations) no_backtracking &= it.backtracking_steps == 0;
    // analytic slab volume at the converged weights, and a sampling cross-check
    const double analytic = 0.5 + 2 * dw;
    const auto mc = oracle::sample_cells(seeds.positions(), r.weights, kUnit.lengths(), 1000000, 1);
    const double sigmas = std::abs(mc.volumes[0] - r.diagram.volumes[0]) / mc.standard_errors[0];
    std::ostringstream d;
    d << "w1-w2=" << dw << " iterations=" << r.report.newton_iterations()
      << " |v1-analytic|=" << std::abs(r.diagram.volumes[0] - analytic) << " MC " << sigmas
      << " sigma, solve " << secs << " s";
    const bool ok = std::abs(dw + 0.1) < 1e-8 && r.report.newton_iterations() <= 2 &&
                    no_backtracking && std::abs(analytic - 0.3) < 1e-8 &&
                    std::abs(r.diagram.volumes[0] - analytic) < 1e-8 && sigmas < 4 && secs < 1.0;
    return Outcome{ok, d.str()};
  });

  criterion(2, "gradient vs finite differences", [] {
    double worst = 0.0;
    for (const auto& seeds : derivative_instances()) {
      const TargetMasses m(oracle::random_targets(seeds.size(), seeds.size() * 7 + 1), kUnit);
      const Eigen::VectorXd g = kantorovich_gradient(compute_diagram(seeds), m);
      const Eigen::VectorXd fd = oracle::fd_gradient(seeds, m, 1e-6);
      worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff());
    }
    std::ostringstream d;
    d << "max relative error " << worst << " over 10 instances (tol 1e-5)";
    return Outcome{worst < 1e-5, d.str()};
  });

  criterion(3, "Hessian vs finite differences", [] {
    double fd_err = 0.0, row = 0.0, asym = 0.0, min_off = 0.0, scale = 0.0;
    for (const auto& seeds : derivative_instances()) {
      const Eigen::MatrixXd h = Eigen::MatrixXd(kantorovich_hessian(compute_diagram(seeds)));
      const Eigen::MatrixXd fd = oracle::fd_hessian(seeds, 1e-5);
      const int n = seeds.size();
      scale = std::max(scale, h.cwiseAbs().maxCoeff());
      for (int i = 0; i < n; ++i) {
        row = std::max(row, std::abs(h.row(i).sum()));
        for (int j = 0; j < n; ++j) {
          asym = std::max(asym, std::abs(h(i, j) - h(j, i)));
          if (i != j) min_off = std::min(min_off, h(i, j));
          const double err = std::abs(h(i, j) - fd(i, j));
          fd_err = std::max(fd_err, h(i, j) != 0.0 ? err / std::abs(h(i, j)) : (err > 1e-6 ? 1.0 : 0.0));
        }
      }
    }
    std::ostringstream d;
    d << "entrywise rel error " << fd_err << ", max |row sum| " << row << ", asymmetry " << asym
      << ", min off-diagonal " << min_off;
    return Outcome{fd_err < 1e-4 && row <= 1e-10 && asym <= 1e-12 * scale && min_off >= 0.0, d.str()};
  });

  criterion(4, "partition and Monte Carlo oracle", [] {
    // Standard error of the sampled fraction at the volume under test,
    // sqrt(p (1 - p) / N) |V| with p = v_i / |V|; the plug-in version with the
    // sampled p is reported alongside.
    const double samples = 1e6;
    double partition = 0.0, sigmas = 0.0, plug_in = 0.0;
    int cells = 0;
    for (int n : {10, 100, 1000}) {
      const SeedSet seeds = oracle::random_weighted(n, kUnit, 40 + n);
      const auto d = compute_diagram(seeds);
      partition = std::max(partition, std::abs(d.volumes.sum() - kUnit.volume()) / kUnit.volume());
      const auto mc = oracle::sample_cells(seeds.positions(), seeds.weights(), kUnit.lengths(),
                                           static_cast<std::int64_t>(samples), 4000 + n);
      for (int i = 0; i < n; ++i) {
        const double p = d.volumes[i] / kUnit.volume();
        const double se = std::sqrt(p * (1.0 - p) / samples) * kUnit.volume();
        const double dev = std::abs(d.volumes[i] - mc.volumes[i]);
        sigmas = std::max(sigmas, dev / se);
        plug_in = std::max(plug_in, dev / std::max(mc.standard_errors[i], 1e-300));
      }
      cells += n;
    }
    std::ostringstream d;
    d << "partition error " << partition << ", worst MC deviation " << sigmas << " sigma ("
      << plug_in << " with plug-in SE) over " << cells << " cells";
    return Outcome{partition < 1e-10 && sigmas <= 4.0, d.str()};
  });

  criterion(5, "convergence at n=1000 log-normal", [] {
    const int runs = 5;
    int max_iter = 0, replay_failures = 0, non_decreasing = 0;
    double worst_pct = 0.0, worst_time = 0.0;
    for (int r = 0; r < runs; ++r) {
      const TargetMasses m = sample_targets({1000, LogNormal{}}, kUnit, 500 + r);
      const SeedSet seeds(sample_seeds(1000, kUnit, 500 + r), kUnit);
      const auto t = Clock::now();
      const auto solved = damped_newton(seeds, m, Eigen::VectorXd::Zero(1000), SolverConfig{});
      worst_time = std::max(worst_time, seconds_since(t));
      const auto& its = solved.report.iterations;
      for (std::size_t k = 1; k < its.size(); ++k)
        non_decreasing += its[k].mass_error >= its[k - 1].mass_error;
      replay_failures += first_acceptance_violation(solved.report) != -1;
      max_iter = std::max(max_iter, solved.report.newton_iterations());
      worst_pct = std::max(worst_pct, mass_error(solved.diagram, m).percent);
      convergence_reports.push_back(solved.report);
    }
    std::ostringstream d;
    d << runs << " runs: max " << max_iter << " Newton iterations, final max error " << worst_pct
      << "%, " << non_decreasing << " non-decreasing steps, " << replay_failures
      << " rule violations, slowest " << worst_time << " s";
    return Outcome{max_iter <= 25 && non_decreasing == 0 && replay_failures == 0 && worst_pct < 1.0 &&
                       worst_time <= 60.0,
                   d.str()};
  });

  criterion(6, "n=10000 log-normal RVE, L=2, 5 Lloyd rounds", [] {
    const Lattice lat(2, 2, 2);
    RveOptions opt;
    opt.lloyd_steps = 5;
    opt.rng_seed = 2024;
    const auto t = Clock::now();
    const auto r = generate_rve({10000, LogNormal{}}, lat, opt);
    const double secs = seconds_since(t);
    double worst = 0.0;
    for (int i = 0; i < r.diagram.size(); ++i)
      worst = std::max(worst, 100.0 * std::abs(r.diagram.volumes[i] - r.targets[i]) / r.targets[i]);
    std::ostringstream d;
    d << "max grain error " << worst << "%, " << r.reports.size() << " solves, Newton iterations";
    for (const auto& rep : r.reports) d << ' ' << rep.newton_iterations();
    d << ", total " << secs << " s";
    return Outcome{worst < 1.0 && r.reports.size() == 5 && secs <= 600.0, d.str()};
  });

  criterion(7, "no backtracking after Newton iteration 6", [] {
    cli::BacktrackConfig cfg;
    cfg.n = 1000;
    cfg.repeats = 10;
    cfg.dist = "lognormal";
    cfg.rng_seed = 7;
    std::ostringstream out, log;
    const auto t = Clock::now();
    cli::cmd_backtrack_study(cfg, out, log);
    const double secs = seconds_since(t);
    int latest = 0, runs = 0, late = 0;
    for (const auto& row : read_csv(out.str())) {
      const int it = std::stoi(row[1]), steps = std::stoi(row[2]);
      runs = std::max(runs, std::stoi(row[0]) + 1);
      if (steps > 0) latest = std::max(latest, it);
      if (steps > 0 && it > 6) ++late;
    }
    const bool clean = log.str().find("(0 failed runs)") != std::string::npos;
    std::ostringstream d;
    d << runs << " runs, latest backtracking at iteration " << latest << ", " << secs << " s";
    return Outcome{clean && runs == 10 && late == 0 && secs < 120.0, d.str()};
  });

  criterion(8, "SP scaling n=100 vs n=1000", [] {
    cli::BenchConfig cfg;
    cfg.sizes = {100, 1000};
    cfg.dists = {"sp"};
    cfg.repeats = 20;
    cfg.rng_seed = 8;
    std::ostringstream out, log;
    const auto t = Clock::now();
    cli::cmd_bench(cfg, out, log);
    const double secs = seconds_since(t);
    const auto rows = read_csv(out.str());
    if (rows.size() != 2) return Outcome{false, "unexpected bench output"};
    const double small = std::stod(rows[0][4]), large = std::stod(rows[1][4]);
    const int failed = std::stoi(rows[0][3]) + std::stoi(rows[1][3]);
    std::ostringstream d;
    d << "mean " << small << " s vs " << large << " s, ratio " << large / small << ", " << failed
      << " failed runs, " << secs << " s";
    return Outcome{failed == 0 && large / small < 50.0 && secs < 180.0, d.str()};
  });

  criterion(9, "superlinear tail", [] {
    int qualifying = 0, violations = 0;
    for (const auto& rep : convergence_reports) {
      const int k = rep.newton_iterations();
      if (k < 4) continue;
      ++qualifying;
      const auto& it = rep.iterations;
      double previous = std::numeric_limits<double>::infinity();
      for (int j = k - 2; j <= k; ++j) {
        const double ratio = it[j].mass_error / it[j - 1].mass_error;
        if (!(ratio < previous)) ++violations;
        previous = ratio;
      }
    }
    std::ostringstream d;
    d << qualifying << " of " << convergence_reports.size() << " runs with >= 4 iterations, "
      << violations << " non-decreasing ratios";
    return Outcome{qualifying > 0 && violations == 0, d.str()};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
