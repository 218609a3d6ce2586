#include "rvegen/sdot.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace rvegen {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

TargetMasses::TargetMasses(Eigen::VectorXd masses, const Lattice& lat) : masses_(std::move(masses)) {
  if (masses_.size() == 0) throw Error(ErrorCode::InvalidArgument, "no target masses");
  if (!masses_.allFinite() || masses_.minCoeff() <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "target masses must be positive");
  masses_ *= lat.volume() / masses_.sum();
}

int SolverReport::total_backtracking() const {
  int total = 0;
  for (const auto& r : iterations) total += r.backtracking_steps;
  return total;
}

double kantorovich_value(const LaguerreDiagram& diagram, const SeedSet& seeds,
                         const TargetMasses& m) {
  const Eigen::VectorXd& w = seeds.weights();
  double value = 0.0;
  for (int i = 0; i < diagram.size(); ++i) {
    value += second_moment(diagram.cells[i], seeds.position(i)) - w[i] * diagram.volumes[i] +
             m[i] * w[i];
  }
  return value;
}

double kantorovich_value(const SeedSet& seeds, const TargetMasses& m) {
  return kantorovich_value(compute_diagram(seeds), seeds, m);
}

Eigen::VectorXd kantorovich_gradient(const LaguerreDiagram& diagram, const TargetMasses& m) {
  if (m.size() != diagram.size())
    throw Error(ErrorCode::InvalidArgument, "target mass count does not match diagram");
  return m.values() - diagram.volumes;
}

Eigen::SparseMatrix<double> kantorovich_hessian(const LaguerreDiagram& diagram) {
  const int n = diagram.size();
  for (int i = 0; i < n; ++i) {
    if (!(diagram.volumes[i] > 0.0)) {
      std::ostringstream msg;
      msg << "empty cell " << i << ": Hessian undefined";
      throw Error(ErrorCode::EmptyCell, msg.str());
    }
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(diagram.interfaces.size() + n);
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(n);
  for (const auto& f : diagram.interfaces) {
    if (f.i == f.j) continue;  // a cell facing its own image
    const double h = f.area / (2.0 * f.distance);
    entries.emplace_back(f.i, f.j, h);
    row_sum[f.i] += h;
  }
  for (int i = 0; i < n; ++i) entries.emplace_back(i, i, -row_sum[i]);
  Eigen::SparseMatrix<double> hessian(n, n);
  hessian.setFromTriplets(entries.begin(), entries.end());
  return hessian;
}

Eigen::VectorXd reduced_solve(const Eigen::SparseMatrix<double>& hessian, const Eigen::VectorXd& b,
                              double tolerance) {
  const Eigen::Index r = hessian.rows() - 1;
  if (b.size() != r) throw Error(ErrorCode::InvalidArgument, "right-hand side has wrong size");
  if (r == 0) return Eigen::VectorXd();
  const double b_norm = b.norm();
  if (b_norm == 0.0) return Eigen::VectorXd::Zero(r);

  const Eigen::SparseMatrix<double> a = -hessian.topLeftCorner(r, r);
  auto singular = [] {
    return Error(ErrorCode::SingularReducedHessian,
                 "singular reduced Hessian (interface graph disconnected?)");
  };

  // Conjugate gradients with an incomplete Cholesky preconditioner; a direct
  // factorization takes over if CG stalls short of the tolerance.
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(tolerance);
  cg.setMaxIterations(static_cast<Eigen::Index>(std::max<Eigen::Index>(200, 2 * r)));
  cg.compute(a);
  if (cg.info() == Eigen::Success) {
    Eigen::VectorXd d = cg.solve(b);
    if (d.allFinite() && (b - a * d).norm() <= tolerance * b_norm) return d;
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  ldlt.compute(a);
  if (ldlt.info() != Eigen::Success) throw singular();
  const Eigen::VectorXd pivots = ldlt.vectorD();
  if (!(pivots.minCoeff() > 1e-13 * pivots.cwiseAbs().maxCoeff())) throw singular();

  Eigen::VectorXd d = ldlt.solve(b);
  Eigen::VectorXd residual = b - a * d;
  for (int refine = 0; refine < 3 && residual.norm() > tolerance * b_norm; ++refine) {
    d += ldlt.solve(residual);
    residual = b - a * d;
  }
  if (!d.allFinite() || residual.norm() > tolerance * b_norm) throw singular();
  return d;
}

MassError mass_error(const LaguerreDiagram& diagram, const TargetMasses& m) {
  MassError e;
  for (int i = 0; i < diagram.size(); ++i) {
    const double dev = std::abs(diagram.volumes[i] - m[i]);
    e.absolute = std::max(e.absolute, dev);
    e.percent = std::max(e.percent, 100.0 * dev / m[i]);
  }
  return e;
}

NewtonResult damped_newton(const SeedSet& seeds, const TargetMasses& m, const Eigen::VectorXd& w0,
                           const SolverConfig& cfg) {
  const int n = seeds.size();
  if (m.size() != n || w0.size() != n)
    throw Error(ErrorCode::InvalidArgument, "weights, targets and seeds differ in size");
  if (!(cfg.eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");

  const auto start = Clock::now();
  NewtonResult result;
  SolverReport& report = result.report;

  Eigen::VectorXd w = w0.array() - w0[n - 1];
  auto t = Clock::now();
  SeedSet current = seeds.with_weights(w);
  LaguerreDiagram diagram = compute_diagram(current);
  IterationRecord record;
  record.seconds_diagram = seconds_since(t);

  if (!(diagram.min_volume() > 0.0))
    throw Error(ErrorCode::InfeasibleInitialGuess,
                "infeasible initial guess: some cell has zero volume");
  report.epsilon = 0.5 * std::min(diagram.min_volume(), m.values().minCoeff());

  MassError err = mass_error(diagram, m);
  auto fill = [&](IterationRecord& r) {
    r.mass_error = err.absolute;
    r.percent_error = err.percent;
    r.min_volume = diagram.min_volume();
    r.kantorovich = kantorovich_value(diagram, current, m);
  };
  fill(record);
  record.seconds_total = seconds_since(start);
  report.iterations.push_back(record);

  for (int k = 1; err.percent >= cfg.eta; ++k) {
    if (k > cfg.max_iterations) {
      std::ostringstream msg;
      msg << "max iterations exceeded (" << cfg.max_iterations << "), percentage error "
          << err.percent;
      throw Error(ErrorCode::MaxIterationsExceeded, msg.str());
    }
    const auto iteration_start = Clock::now();
    record = IterationRecord{};
    record.iteration = k;

    t = Clock::now();
    const Eigen::SparseMatrix<double> hessian = kantorovich_hessian(diagram);
    const Eigen::VectorXd b = kantorovich_gradient(diagram, m).head(n - 1);
    record.seconds_hessian = seconds_since(t);
    t = Clock::now();
    const Eigen::VectorXd direction = reduced_solve(hessian, b, cfg.linear_tolerance);
    record.seconds_solve = seconds_since(t);

    const double previous = err.absolute;
    for (int l = 0;; ++l) {
      if (l > cfg.max_backtracking) {
        std::ostringstream msg;
        msg << "line search failed at Newton iteration " << k << " after " << cfg.max_backtracking
            << " backtracking steps";
        throw Error(ErrorCode::LineSearchFailed, msg.str());
      }
      const double step = std::ldexp(1.0, -l);
      Eigen::VectorXd trial = w;
      trial.head(n - 1) += step * direction;
      trial[n - 1] = 0.0;
      t = Clock::now();
      SeedSet trial_seeds = seeds.with_weights(trial);
      LaguerreDiagram trial_diagram = compute_diagram(trial_seeds);
      record.seconds_diagram += seconds_since(t);
      const MassError trial_err = mass_error(trial_diagram, m);
      if (trial_diagram.min_volume() >= report.epsilon &&
          trial_err.absolute <= (1.0 - std::ldexp(1.0, -(l + 1))) * previous) {
        w = std::move(trial);
        current = std::move(trial_seeds);
        diagram = std::move(trial_diagram);
        err = trial_err;
        record.backtracking_steps = l;
        break;
      }
    }
    fill(record);
    record.seconds_total = seconds_since(iteration_start);
    report.iterations.push_back(record);
  }

  report.converged = true;
  report.seconds_total = seconds_since(start);
  result.weights = std::move(w);
  result.diagram = std::move(diagram);
  return result;
}

int first_acceptance_violation(const SolverReport& report) {
  for (std::size_t k = 1; k < report.iterations.size(); ++k) {
    const auto& r = report.iterations[k];
    const double factor = 1.0 - std::ldexp(1.0, -(r.backtracking_steps + 1));
    if (r.min_volume < report.epsilon ||
        r.mass_error > factor * report.iterations[k - 1].mass_error)
      return static_cast<int>(k);
  }
  return -1;
}

}  // namespace rvegen
