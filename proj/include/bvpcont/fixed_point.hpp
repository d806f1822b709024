#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bvpcont/grid.hpp"

namespace bvpcont {

/// Parameterized compact operator (c, w) -> T(c, w) on a fixed state space.
struct OperatorFamily {
  using Evaluate = std::function<GridFn(std::span<const double> c, const GridFn& w)>;

  Evaluate evaluate;
  std::size_t param_dim = 1;
  UniformGrid grid{0.0, 1.0, 2};
  std::size_t dim = 1;
  /// Declared invariant-ball radius: ||T(c, w)|| <= radius for admissible (c, w).
  double radius = std::numeric_limits<double>::infinity();

  GridFn operator()(double c, const GridFn& w) const { return evaluate(std::span(&c, 1), w); }
  GridFn operator()(std::span<const double> c, const GridFn& w) const { return evaluate(c, w); }
  GridFn zero_state() const { return GridFn(grid, dim); }
};

struct SolveReport {
  GridFn solution;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::string method;
};

struct SolverOptions {
  double tol = 1e-10;
  int picard_max_iter = 500;
  int newton_max_iter = 50;
  double damping = 1.0;
  /// Picard halves its damping on residual increase down to this floor.
  double min_damping = 0.25;
  /// Picard gives up once the best residual has not improved for this many
  /// iterations (the caller then escalates to Newton).
  int stall_window = 60;
  bool newton_fallback = true;
};

/// Damped Picard iteration v <- (1-d) v + d T(c, v).
SolveReport picard_solve(const OperatorFamily& op, std::span<const double> c, GridFn v0,
                         double tol, int max_iter, double damping,
                         const SolverOptions& opts = {});

/// Damped Newton on F(v) = v - T(c, v) with a forward-difference Jacobian.
SolveReport newton_solve(const OperatorFamily& op, std::span<const double> c, GridFn v0,
                         double tol, int max_iter);

/// Picard first, Newton on non-convergence.
SolveReport solve_fixed_point(const OperatorFamily& op, std::span<const double> c,
                              const GridFn& v0, const SolverOptions& opts);

inline SolveReport solve_fixed_point(const OperatorFamily& op, double c, const GridFn& v0,
                                     const SolverOptions& opts) {
  return solve_fixed_point(op, std::span(&c, 1), v0, opts);
}

struct SystemReport {
  Eigen::VectorXd x;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

using SystemResidual = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Damped Newton for a square system F(x) = 0 (sup-norm residual). The
/// Jacobian is assembled column by column from forward differences with
/// step 1e-6 (1 + ||x||), then factorized densely. At most 20 step halvings.
///
/// Throws SolverError(SingularJacobian) or SolverError(NoDescent).
SystemReport newton_system(const SystemResidual& residual, Eigen::VectorXd x0, double tol,
                           int max_iter);

}  // namespace bvpcont
