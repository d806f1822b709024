#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bvpcont/continuation.hpp"
#include "bvpcont/fixed_point.hpp"
#include "bvpcont/grid.hpp"
#include "bvpcont/maps.hpp"

namespace bvpcont {

enum class GrowthClass { BoundedSublinear, Superlinear, UserBracket, PlanarDegree };

/// Constants of the relaxed sublinear setting |f(t,u)| <= eps |u| + C and
/// |g(u)| <= A |u| + B.
struct RelaxedGrowth {
  double eps = 0.0;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
};

/// u'' = f(t, u) on (-L, L) with u(+-L) = g(u(0)).
struct NonlocalProblem {
  double half_length = 1.0;
  std::size_t dim = 1;
  FieldFn f;
  VectorMap g;
  std::optional<double> f_sup;
  GrowthClass growth = GrowthClass::UserBracket;
  std::pair<double, double> bracket{-1.0, 1.0};
  Rectangle region;
  std::optional<RelaxedGrowth> relaxed;
  /// Half-width of the u-range sampled for f_sup when it is not declared.
  double working_range = 10.0;
  std::size_t n_nodes = 401;

  UniformGrid grid() const { return UniformGrid::symmetric(half_length, n_nodes); }
};

/// Declared f_sup, or the relaxed-growth bound, or a 201 x 201 sample of |f|.
double effective_f_sup(const NonlocalProblem& prob);

/// Radius R = (L^2/2) f_sup of the invariant ball.
double nonlocal_radius(const NonlocalProblem& prob);

/// A-priori bound (kC + B)/(1 - k eps - A) on solutions in the relaxed setting.
double relaxed_solution_bound(const NonlocalProblem& prob);

/// (c, w) -> solve_dirichlet(f(., w + c)).
OperatorFamily nonlocal_operator(const NonlocalProblem& prob);

/// c - g(w(0) + c), scalar case.
double nonlocal_phi(double c, const GridFn& w, const NonlocalProblem& prob);

/// Verified parameter bracket over which the functional changes sign.
/// Throws SolverError(BracketNotFound) if the growth scan is exhausted.
std::pair<double, double> choose_bracket(const NonlocalProblem& prob);

struct NonlocalSolution {
  std::vector<double> c;
  GridFn u;
  double equation_residual = 0.0;
  double boundary_residual = 0.0;
};

/// Sup-norm of u'' - f(t, u) at interior nodes and of u(+-L) - g(u(0)).
std::pair<double, double> nonlocal_residuals(const NonlocalProblem& prob, const GridFn& u);

struct NonlocalSolveOptions {
  int steps = 64;
  double tol_c = 1e-12;
  SolverOptions solver;
};

/// All solutions found along the branch over the chosen bracket (scalar).
/// Throws SolverError(NoSignChange) when none is found. The traced branch
/// is copied to `branch_out` when given.
std::vector<NonlocalSolution> solve_nonlocal(const NonlocalProblem& prob,
                                             const NonlocalSolveOptions& opts = {},
                                             Branch* branch_out = nullptr);

struct PlanarSolution {
  NonlocalSolution solution;
  int winding = 0;
  int starts_tried = 0;
};

/// Planar system: checks g(r + c) != c on the boundary of the region for
/// |r| <= R and a non-zero winding of c - g(c), then multistart Newton on
/// the coupled unknowns (c, v) from a grid of starts over the region.
PlanarSolution solve_nonlocal_planar(const NonlocalProblem& prob, int multistart_grid = 3,
                                     double tol = 1e-10);

}  // namespace bvpcont
