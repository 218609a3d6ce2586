// Periodic semi-discrete optimal transport: the Kantorovich dual, its
// derivatives, and a damped Newton method for the weights.

#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rvegen/tessellation.hpp"

namespace rvegen {

/// Positive target cell volumes, rescaled on construction to sum to |V|.
class TargetMasses {
 public:
  TargetMasses(Eigen::VectorXd masses, const Lattice& lat);

  int size() const { return static_cast<int>(masses_.size()); }
  const Eigen::VectorXd& values() const { return masses_; }
  double operator[](int i) const { return masses_[i]; }

 private:
  Eigen::VectorXd masses_;
};

struct SolverConfig {
  double eta = 1.0;  // stop when the max percentage volume error is below eta
  int max_iterations = 100;
  int max_backtracking = 40;
  double linear_tolerance = 1e-11;  // relative residual of the reduced Newton system
};

struct IterationRecord {
  int iteration = 0;         // 0 is the initial guess
  double mass_error = 0.0;   // e(w) = max_i |v_i - m_i|
  double percent_error = 0.0;
  int backtracking_steps = 0;
  double kantorovich = 0.0;
  double min_volume = 0.0;
  double seconds_diagram = 0.0;
  double seconds_hessian = 0.0;
  double seconds_solve = 0.0;
  double seconds_total = 0.0;
};

struct SolverReport {
  std::vector<IterationRecord> iterations;  // iterations[0] describes w^0
  double epsilon = 0.0;
  bool converged = false;
  double seconds_total = 0.0;

  int newton_iterations() const { return static_cast<int>(iterations.size()) - 1; }
  int total_backtracking() const;
};

/// Kantorovich dual value over the cells of an existing diagram.
double kantorovich_value(const LaguerreDiagram& diagram, const SeedSet& seeds,
                         const TargetMasses& m);
double kantorovich_value(const SeedSet& seeds, const TargetMasses& m);

/// dK/dw_i = m_i - v_i.
Eigen::VectorXd kantorovich_gradient(const LaguerreDiagram& diagram, const TargetMasses& m);

/// Off-diagonal entries sum area / (2 * distance) over the interfaces between
/// cell i and images of seed j; each diagonal entry is minus its row's
/// off-diagonal sum. Throws Error(EmptyCell) if any cell has zero volume.
Eigen::SparseMatrix<double> kantorovich_hessian(const LaguerreDiagram& diagram);

/// Solves -H_hat d = b, where H_hat is the Hessian without its last row and
/// column. Throws Error(SingularReducedHessian) if the relative residual
/// cannot be brought below `tolerance`.
Eigen::VectorXd reduced_solve(const Eigen::SparseMatrix<double>& hessian, const Eigen::VectorXd& b,
                              double tolerance = 1e-11);

struct MassError {
  double absolute = 0.0;  // max_i |v_i - m_i|
  double percent = 0.0;   // 100 max_i |v_i - m_i| / m_i
};

MassError mass_error(const LaguerreDiagram& diagram, const TargetMasses& m);

struct NewtonResult {
  Eigen::VectorXd weights;
  LaguerreDiagram diagram;
  SolverReport report;
};

/// Damped Newton maximization of the Kantorovich dual starting from w0. The
/// weights of `seeds` are ignored; w0 is shifted so that its last entry is 0,
/// and that entry stays pinned. On success the max percentage error is < eta.
NewtonResult damped_newton(const SeedSet& seeds, const TargetMasses& m, const Eigen::VectorXd& w0,
                           const SolverConfig& cfg);

/// Replays the line-search acceptance rule from a report; returns the first
/// violating iteration or -1 if all steps comply.
int first_acceptance_violation(const SolverReport& report);

}  // namespace rvegen
