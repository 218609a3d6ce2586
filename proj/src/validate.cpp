#include "rvegen/validate.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include "rvegen/rve.hpp"

namespace rvegen::validate {

Instance random_instance(int n, const Lattice& lat, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  const double spacing = std::cbrt(lat.volume() / n);
  double amplitude = 0.3 * spacing * spacing;
  for (int attempt = 0; attempt < 50; ++attempt) {
    auto positions = sample_seeds(n, lat, rng());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd w(n), m(n);
    for (int i = 0; i < n; ++i) w[i] = amplitude * unit(rng);
    for (int i = 0; i < n; ++i) m[i] = 0.5 + unit(rng);
    SeedSet seeds(std::move(positions), std::move(w), lat);
    if (compute_diagram(seeds).min_volume() > 1e-3 * lat.volume() / n)
      return {std::move(seeds), TargetMasses(std::move(m), lat)};
    amplitude *= 0.7;
  }
  throw Error(ErrorCode::InvalidArgument, "could not build an instance with nonempty cells");
}

double gradient_fd_error(const SeedSet& seeds, const TargetMasses& m, double step) {
  const int n = seeds.size();
  const Eigen::VectorXd g = kantorovich_gradient(compute_diagram(seeds), m);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd w = seeds.weights();
    w[i] += step;
    const double plus = kantorovich_value(seeds.with_weights(w), m);
    w[i] -= 2.0 * step;
    const double minus = kantorovich_value(seeds.with_weights(w), m);
    worst = std::max(worst, std::abs((plus - minus) / (2.0 * step) - g[i]));
  }
  const double scale = g.cwiseAbs().maxCoeff();
  return scale > 0.0 ? worst / scale : worst;
}

HessianCheck hessian_check(const SeedSet& seeds, double step, bool flip_offdiagonal_sign) {
  const int n = seeds.size();
  Eigen::MatrixXd h = Eigen::MatrixXd(kantorovich_hessian(compute_diagram(seeds)));
  if (flip_offdiagonal_sign) {
    const Eigen::VectorXd diag = h.diagonal();
    h = -h;
    h.diagonal() = diag;
  }

  HessianCheck out;
  out.min_offdiagonal = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    out.max_row_sum = std::max(out.max_row_sum, std::abs(h.row(i).sum()));
    for (int j = 0; j < n; ++j) {
      out.asymmetry = std::max(out.asymmetry, std::abs(h(i, j) - h(j, i)));
      if (i != j) out.min_offdiagonal = std::min(out.min_offdiagonal, h(i, j));
    }
  }
  if (n == 1) out.min_offdiagonal = 0.0;

  // column j of the Hessian is d(m - v)/dw_j = -dv/dw_j
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd w = seeds.weights();
    w[j] += step;
    const Eigen::VectorXd plus = compute_diagram(seeds.with_weights(w)).volumes;
    w[j] -= 2.0 * step;
    const Eigen::VectorXd minus = compute_diagram(seeds.with_weights(w)).volumes;
    const Eigen::VectorXd column = -(plus - minus) / (2.0 * step);
    for (int i = 0; i < n; ++i) {
      const double scale = std::abs(h(i, j));
      const double err = std::abs(h(i, j) - column[i]);
      out.fd_error = std::max(out.fd_error, scale > 0.0 ? err / scale : err);
    }
  }
  return out;
}

double partition_error(const LaguerreDiagram& diagram, const Lattice& lat) {
  return std::abs(diagram.volumes.sum() - lat.volume()) / lat.volume();
}

double mirror_error(const LaguerreDiagram& diagram) {
  std::map<std::tuple<int, int, Shift>, double> areas;
  for (const auto& f : diagram.interfaces) areas[{f.i, f.j, f.shift}] = f.area;
  double worst = 0.0;
  for (const auto& f : diagram.interfaces) {
    const auto it = areas.find({f.j, f.i, Shift{-f.shift[0], -f.shift[1], -f.shift[2]}});
    if (it == areas.end()) return 1.0;
    worst = std::max(worst, std::abs(it->second - f.area) / std::max(f.area, it->second));
  }
  return worst;
}

double monte_carlo_sigmas(const LaguerreDiagram& diagram, const SeedSet& seeds,
                          std::int64_t samples, std::uint64_t rng_seed) {
  const auto mc = monte_carlo_volumes(seeds, samples, rng_seed);
  double worst = 0.0;
  for (int i = 0; i < diagram.size(); ++i) {
    const double diff = std::abs(diagram.volumes[i] - mc.volumes[i]);
    // an empty Monte Carlo bin has zero binomial error; use the one-count floor
    const double se = std::max(mc.standard_errors[i], seeds.lattice().volume() / samples);
    worst = std::max(worst, diff / se);
  }
  return worst;
}

std::vector<CheckResult> run(const Options& options, std::ostream& log) {
  const bool full = options.level == Level::Full;
  std::vector<CheckResult> results;
  auto record = [&](std::string name, double measured, double tolerance) {
    const bool ok = measured <= tolerance;
    log << (ok ? "PASS " : "FAIL ") << name << ": measured " << measured << " tolerance "
        << tolerance << std::endl;
    results.push_back({std::move(name), measured, tolerance, ok});
  };
  const Lattice unit;
  std::uint64_t seed = options.rng_seed;

  const int fd_instances = full ? 10 : 2;
  double grad_err = 0.0, hess_err = 0.0, row_sum = 0.0, asym = 0.0, neg_offdiag = 0.0;
  for (int k = 0; k < fd_instances; ++k) {
    const int n = k % 2 == 0 ? 5 : 20;
    const auto inst = random_instance(n, unit, ++seed);
    grad_err = std::max(grad_err, gradient_fd_error(inst.seeds, inst.targets, 1e-6));
    const auto hc = hessian_check(inst.seeds, 1e-6, options.flip_hessian_sign);
    hess_err = std::max(hess_err, hc.fd_error);
    row_sum = std::max(row_sum, hc.max_row_sum);
    asym = std::max(asym, hc.asymmetry);
    neg_offdiag = std::max(neg_offdiag, -hc.min_offdiagonal);
  }
  record("gradient vs finite differences (relative)", grad_err, 1e-5);
  record("Hessian vs finite differences (relative)", hess_err, 1e-4);
  record("Hessian row sums", row_sum, 1e-10);
  record("Hessian asymmetry", asym, 1e-12);
  record("Hessian negative off-diagonal", neg_offdiag, 0.0);

  const std::vector<int> sizes = full ? std::vector<int>{10, 100, 1000, 10000}
                                      : std::vector<int>{10, 100};
  double part = 0.0, mirror = 0.0, shift = 0.0;
  for (int n : sizes) {
    const auto inst = random_instance(n, unit, ++seed);
    const auto diagram = compute_diagram(inst.seeds);
    const double err = partition_error(diagram, unit);
    log << "  partition n=" << n << ": |sum v - |V|| / |V| = " << err << std::endl;
    part = std::max(part, err);
    mirror = std::max(mirror, mirror_error(diagram));
    if (n <= 1000) {
      const Eigen::VectorXd shifted = inst.seeds.weights().array() + 17.3;
      const auto moved = compute_diagram(inst.seeds.with_weights(shifted));
      shift = std::max(shift, (moved.volumes - diagram.volumes).cwiseAbs().maxCoeff());
    }
  }
  record("partition of unit box (relative)", part, 1e-10);
  record("interface mirror areas (relative)", mirror, 1e-9);
  record("weight shift invariance of volumes", shift, 1e-12);

  const std::vector<int> mc_sizes = full ? std::vector<int>{10, 100, 1000} : std::vector<int>{10};
  const std::int64_t samples = full ? 1000000 : 200000;
  double sigmas = 0.0;
  for (int n : mc_sizes) {
    const auto inst = random_instance(n, unit, ++seed);
    sigmas = std::max(sigmas, monte_carlo_sigmas(compute_diagram(inst.seeds), inst.seeds, samples,
                                                 ++seed));
  }
  record("volumes vs Monte Carlo oracle (standard errors)", sigmas, 4.0);

  {
    const auto inst = random_instance(full ? 200 : 50, unit, ++seed);
    SolverConfig cfg;
    cfg.eta = 0.01;
    const auto solved = damped_newton(inst.seeds, inst.targets,
                                      Eigen::VectorXd::Zero(inst.seeds.size()), cfg);
    record("damped Newton final percentage error", solved.report.iterations.back().percent_error,
           cfg.eta);
    record("damped Newton acceptance rule replay (violations)",
           first_acceptance_violation(solved.report) < 0 ? 0.0 : 1.0, 0.0);
  }
  return results;
}

}  // namespace rvegen::validate
