#pragma once

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bvpcont/grid.hpp"

namespace bvpcont {

/// s' = D (s0 - s) - mu(s) x / gamma,  x' = x (mu(s(t - tau)) - D).
struct ChemostatModel {
  double omega = 1.0;
  double tau = 0.5;
  double gamma = 1.0;
  PeriodicSignal D = PeriodicSignal::constant(1.0, 1, 0.25);
  PeriodicSignal s0 = PeriodicSignal::constant(1.0, 1, 1.0);
  std::function<double(double)> mu;
  std::string mu_label = "custom";
  /// Base number of integrator steps per period; raised slightly when that
  /// makes tau a whole number of steps.
  std::size_t steps_per_period = 2048;
};

/// m s / (k_s + s).
std::function<double(double)> monod(double m, double k_s);

/// Throws SolverError(InvalidArgument) unless 0 < tau < omega, gamma > 0,
/// D and s0 are positive, mu(0) = 0 and mu increases on sampled points.
void validate(const ChemostatModel& model);

struct StepPlan {
  std::size_t steps = 0;
  double h = 0.0;
  /// Intervals of the history grid on [-tau, 0].
  std::size_t history_intervals = 0;
  /// True when tau is an exact multiple of h.
  bool aligned = false;
};

StepPlan step_plan(const ChemostatModel& model);

/// Samples of s on a uniform grid over [-tau, 0].
using HistoryFn = GridFn;

UniformGrid history_grid(const ChemostatModel& model);

/// Periodic solution v* of v' = D (s0 - v), on the integrator nodes.
PeriodicSignal compute_vstar(const ChemostatModel& model);

/// v* restricted to [-tau, 0].
HistoryFn vstar_history(const ChemostatModel& model, const PeriodicSignal& vstar);

struct Trajectory {
  double h = 0.0;
  std::vector<double> t;
  std::vector<double> s;
  std::vector<double> x;
  std::vector<double> ds;
  /// Running integrals of mu(s) and D from t = 0.
  std::vector<double> int_mu;
  std::vector<double> int_D;
  HistoryFn history;

  /// s at any time in [-tau, t.back()], Hermite on the stored derivatives.
  double s_at(double time) const;
};

/// Method of steps with classical RK4 at the planned step.
///
/// Throws SolverError(PositivityViolation) or SolverError(NonFiniteState).
Trajectory integrate_dde(const ChemostatModel& model, const HistoryFn& phi, double x0,
                         double t_end);

struct PoincareImage {
  HistoryFn s_omega;
  double x_omega = 0.0;
  Trajectory trajectory;
};

PoincareImage poincare_map(const ChemostatModel& model, const HistoryFn& phi, double x0);

struct InnerFixedPoint {
  HistoryFn phi;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Picard on phi -> s_omega at fixed x0, started from `start`
/// (v* on [-tau, 0] when empty).
///
/// Throws SolverError(NoConvergence) with the best residual.
InnerFixedPoint inner_fixed_point(const ChemostatModel& model, double x0, double tol = 1e-9,
                                  int max_iter = 300, const HistoryFn* start = nullptr);

/// mean mu(s) - mean D over one period from (phi, x0).
double phi_functional(const ChemostatModel& model, double x0, const HistoryFn& phi);

/// mean mu(v*) - mean D, by Gauss quadrature on each sample interval.
double existence_margin(const ChemostatModel& model);

struct NonexistenceCertificate {
  double margin = 0.0;
  double mean_mu_vstar = 0.0;
  double mean_D = 0.0;
};

struct PeriodicOrbit {
  HistoryFn phi;
  double x0 = 0.0;
  double phi_value = 0.0;
  Trajectory trajectory;
  double poincare_residual = 0.0;
  double log_identity_defect = 0.0;
  bool positivity_ok = false;
  bool below_vstar_ok = false;
  bool x_lower_bound_ok = false;
  int scan_probes = 0;
  int bisection_steps = 0;

  bool verified() const {
    return poincare_residual <= 1e-7 && log_identity_defect <= 1e-8 && positivity_ok &&
           below_vstar_ok && x_lower_bound_ok;
  }
};

/// Certificate when the margin is not positive; otherwise geometric scan in
/// x0 for a negative functional, bisection to |Phi| <= tol, and verification.
///
/// Throws SolverError(ScanExhausted) when the scan passes x0_max.
std::variant<PeriodicOrbit, NonexistenceCertificate> find_periodic_orbit(
    const ChemostatModel& model, double x0_max = 1e6, double tol = 1e-8);

}  // namespace bvpcont
