#pragma once

#include <functional>

#include "bvpcont/grid.hpp"

namespace bvpcont {

/// Solves v'' = h with v = 0 at both grid ends, componentwise, using
/// second-order central differences and a tridiagonal sweep.
///
/// On (-L, L) the result satisfies ||v|| <= (L^2/2) ||h|| up to O(step^2).
GridFn solve_dirichlet(const GridFn& load);

/// Solves v'' + a v' = q with v = 0 at both grid ends (central differences).
GridFn solve_two_point_damped(const GridFn& load, double damping);

/// Sup-norm bound constant k of the Dirichlet inverse on an interval of
/// half-length L; exact for the continuous Green function.
inline double dirichlet_bound_constant(double half_length) {
  return 0.5 * half_length * half_length;
}

struct EndpointSlopes {
  double left = 0.0;
  double right = 0.0;
};

/// Second-order one-sided difference slopes at both ends of component d.
EndpointSlopes endpoint_slopes(const GridFn& f, std::size_t d = 0);

/// Unique periodic solution of v' = -D v + r on one period, returned on the
/// sample nodes of `decay` with exact slopes attached.
PeriodicSignal solve_periodic_first_order(const PeriodicSignal& decay,
                                          const PeriodicSignal& source);

/// Same, with the coefficients supplied as functions of t. The solution is
/// produced on `n_samples` uniform nodes of [0, period). Quadrature is
/// Gauss-Legendre on each sample interval, so coefficients that are smooth
/// between nodes are integrated to near machine precision.
PeriodicSignal solve_periodic_first_order(double period, std::size_t n_samples,
                                          const std::function<double(double)>& decay,
                                          const std::function<double(double)>& source);

}  // namespace bvpcont
