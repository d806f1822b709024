#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "bvpcont/fixed_point.hpp"
#include "bvpcont/grid.hpp"

namespace bvpcont {

/// Scalar functional evaluated on a fixed point (c, v_c).
using Functional = std::function<double(double c, const GridFn& state)>;

struct BranchPoint {
  double c = 0.0;
  GridFn state;
  double phi = 0.0;
  double residual = 0.0;
};

/// Ordered trace of fixed points along a scalar parameter; c is strictly
/// monotone along `points`.
struct Branch {
  std::vector<BranchPoint> points;
  double c_start = 0.0;
  double c_end = 0.0;

  /// Largest sup-distance between consecutive states. A spike relative to
  /// the typical value flags a jump between fixed-point sets.
  double max_state_jump() const;
};

/// Natural-parameter sweep over `steps` uniform nodes from c_start to c_end
/// (either order), warm-starting each solve from the previous state. A
/// failed solve halves the local step, up to 6 times, inserting the
/// intermediate points.
///
/// Throws SolverError(UnresolvedBranch) when a solve fails at minimum step.
Branch trace_branch(const OperatorFamily& op, const Functional& phi, double c_start,
                    double c_end, int steps, const SolverOptions& opts = {},
                    std::optional<GridFn> start = std::nullopt);

struct PhiRoot {
  double c = 0.0;
  GridFn state;
  double phi = 0.0;
  double residual = 0.0;
};

/// Values with |phi| at or below this count as exact zeros.
inline constexpr double kPhiZeroTol = 1e-10;

/// Roots of phi along the branch: stored zeros plus a bisection refinement
/// (re-solving the fixed point at each midpoint) of every sign change.
std::vector<PhiRoot> find_phi_roots(const Branch& branch, const OperatorFamily& op,
                                    const Functional& phi, double tol_c = 1e-8,
                                    const SolverOptions& opts = {});

/// First root along the branch. Throws SolverError(NoSignChange) if none.
PhiRoot find_phi_root(const Branch& branch, const OperatorFamily& op, const Functional& phi,
                      double tol_c = 1e-8, const SolverOptions& opts = {});

struct Rectangle {
  double x_lo = -1.0;
  double x_hi = 1.0;
  double y_lo = -1.0;
  double y_hi = 1.0;
};

using PlanarMap = std::function<std::array<double, 2>(double, double)>;

/// Winding number of F along the boundary of `rect`, traversed
/// counterclockwise. Segments whose angle increment exceeds pi/2 are
/// subdivided, up to 4 rounds.
///
/// Throws SolverError(ZeroOnBoundary) or SolverError(UnresolvedAngleStep).
int winding_number(const PlanarMap& field, const Rectangle& rect, int n_boundary = 256);

struct MirandaRoot {
  double t = 0.0;
  double x = 0.0;
  /// Whether the phi_1 sign conditions held on all sampled edge points.
  bool edge_conditions_hold = true;
};

/// Zero of phi : [0,1]^2 -> R^2 under the sign conditions
/// phi_1(0,x) <= 0 <= phi_1(1,x) and phi_2(t,0) <= 0 <= phi_2(t,1), found by
/// tracing the fixed points of x -> x - phi_2(t,x)/M over t and locating the
/// sign change of phi_1 along them. The phi_2 conditions are enforced on
/// sampled edges; the phi_1 conditions only at the ends of the traced curve.
MirandaRoot poincare_miranda_solve(const PlanarMap& phi, double M, int n_steps = 64);

}  // namespace bvpcont
