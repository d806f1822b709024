#include "bvpcont/chemostat.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "bvpcont/errors.hpp"
#include "bvpcont/fixed_point.hpp"
#include "bvpcont/linear_solvers.hpp"
#include "quadrature.hpp"

namespace bvpcont {
namespace {

constexpr int kMaxBisection = 200;

struct Rates {
  double s;
  double x;
  double mu;
  double D;
};

}  // namespace

std::function<double(double)> monod(double m, double k_s) {
  return [m, k_s](double s) { return m * s / (k_s + s); };
}

void validate(const ChemostatModel& model) {
  if (!(model.tau > 0 && model.tau < model.omega)) {
    throw SolverError(ErrorCode::InvalidArgument, "delay must satisfy 0 < tau < omega");
  }
  if (!(model.gamma > 0)) throw SolverError(ErrorCode::InvalidArgument, "yield gamma must be positive");
  if (!model.mu) throw SolverError(ErrorCode::InvalidArgument, "growth function missing");
  for (const auto* sig : {&model.D, &model.s0}) {
    if (std::abs(sig->period() - model.omega) > 1e-12 * model.omega) {
      throw SolverError(ErrorCode::InvalidArgument, "coefficient period differs from omega");
    }
    for (double v : sig->samples()) {
      if (!(v > 0)) throw SolverError(ErrorCode::InvalidArgument, "D and s0 must be positive");
    }
  }
  if (std::abs(model.mu(0.0)) > 1e-14) throw SolverError(ErrorCode::InvalidArgument, "mu(0) must vanish");
  const double top = 2 * model.s0.sup_norm();
  double prev = model.mu(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double v = model.mu(top * i / 200.0);
    if (!(v > prev)) {
      throw SolverError(ErrorCode::InvalidArgument,
                        "mu is not strictly increasing near s = " + std::to_string(top * i / 200.0));
    }
    prev = v;
  }
}

StepPlan step_plan(const ChemostatModel& model) {
  const std::size_t base = std::max<std::size_t>(model.steps_per_period, 16);
  StepPlan plan;
  for (std::size_t n = base; n < 2 * base; ++n) {
    const double r = static_cast<double>(n) * model.tau / model.omega;
    const double rr = std::round(r);
    if (rr >= 1 && std::abs(r - rr) <= 1e-9 * std::max(1.0, r)) {
      plan.steps = n;
      plan.h = model.omega / static_cast<double>(n);
      plan.history_intervals = static_cast<std::size_t>(rr);
      plan.aligned = true;
      return plan;
    }
  }
  plan.steps = base;
  plan.h = model.omega / static_cast<double>(base);
  if (model.tau < plan.h) {
    throw SolverError(ErrorCode::InvalidArgument, "delay shorter than one integrator step");
  }
  plan.history_intervals = static_cast<std::size_t>(std::ceil(model.tau / plan.h));
  plan.aligned = false;
  return plan;
}

UniformGrid history_grid(const ChemostatModel& model) {
  return UniformGrid(-model.tau, 0.0, step_plan(model).history_intervals + 1);
}

PeriodicSignal compute_vstar(const ChemostatModel& model) {
  const StepPlan plan = step_plan(model);
  const auto& D = model.D;
  const auto& s0 = model.s0;
  return solve_periodic_first_order(
      model.omega, plan.steps, [&D](double t) { return D.eval(t); },
      [&D, &s0](double t) { return D.eval(t) * s0.eval(t); });
}

HistoryFn vstar_history(const ChemostatModel& model, const PeriodicSignal& vstar) {
  const UniformGrid grid = history_grid(model);
  HistoryFn phi(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) phi(i) = vstar.eval(grid.node(i));
  return phi;
}

double Trajectory::s_at(double time) const {
  if (time <= 0.0) return history.eval(std::max(time, history.grid().t_start()));
  const std::size_t last = t.size() - 1;
  const double pos = time / h;
  std::size_t j = static_cast<std::size_t>(std::floor(pos));
  if (j >= last) {
    if (pos - static_cast<double>(last) <= 1e-9) return s[last];
    throw SolverError(ErrorCode::InvalidArgument, "time beyond the integrated range");
  }
  const double u = pos - static_cast<double>(j);
  return hermite(u, s[j], h * ds[j], s[j + 1], h * ds[j + 1]);
}

Trajectory integrate_dde(const ChemostatModel& model, const HistoryFn& phi, double x0,
                         double t_end) {
  if (!(t_end >= 0)) throw SolverError(ErrorCode::InvalidArgument, "t_end must be non-negative");
  if (!(x0 >= 0)) throw SolverError(ErrorCode::InvalidArgument, "x0 must be non-negative");
  const UniformGrid& hg = phi.grid();
  if (std::abs(hg.t_start() + model.tau) > 1e-12 || std::abs(hg.t_end()) > 1e-12) {
    throw SolverError(ErrorCode::InvalidArgument, "history must live on [-tau, 0]");
  }
  const StepPlan plan = step_plan(model);
  const double h = plan.h;
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));

  Trajectory tr;
  tr.h = h;
  tr.history = phi;
  tr.t.reserve(steps + 1);
  tr.s.reserve(steps + 1);
  tr.x.reserve(steps + 1);
  tr.ds.reserve(steps + 1);
  tr.int_mu.reserve(steps + 1);
  tr.int_D.reserve(steps + 1);
  tr.t.push_back(0.0);
  tr.s.push_back(phi(phi.size() - 1));
  tr.x.push_back(x0);
  tr.int_mu.push_back(0.0);
  tr.int_D.push_back(0.0);

  const double tau = model.tau;
  const double inv_gamma = 1.0 / model.gamma;
  auto delayed = [&](double time) {
    const double r = time - tau;
    if (r <= 1e-12 * model.omega) return phi.eval(std::clamp(r, -tau, 0.0));
    const double pos = r / h;
    const std::size_t j = static_cast<std::size_t>(std::floor(pos));
    const double u = pos - static_cast<double>(j);
    if (j + 1 >= tr.s.size() || j + 1 >= tr.ds.size()) return tr.s[std::min(j, tr.s.size() - 1)];
    return hermite(u, tr.s[j], h * tr.ds[j], tr.s[j + 1], h * tr.ds[j + 1]);
  };
  auto rhs = [&](double time, double s, double x) {
    const double D = model.D.eval(time);
    const double mu_s = model.mu(s);
    const double mu_delay = model.mu(delayed(time));
    return Rates{D * (model.s0.eval(time) - s) - mu_s * x * inv_gamma, x * (mu_delay - D), mu_s, D};
  };

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const double s = tr.s[k];
    const double x = tr.x[k];
    const Rates k1 = rhs(t, s, x);
    tr.ds.push_back(k1.s);
    const Rates k2 = rhs(t + 0.5 * h, s + 0.5 * h * k1.s, x + 0.5 * h * k1.x);
    const Rates k3 = rhs(t + 0.5 * h, s + 0.5 * h * k2.s, x + 0.5 * h * k2.x);
    const Rates k4 = rhs(t + h, s + h * k3.s, x + h * k3.x);
    const double s_next = s + h / 6 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s);
    const double x_next = x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    const double t_next = static_cast<double>(k + 1) * h;
    if (!std::isfinite(s_next) || !std::isfinite(x_next)) {
      throw SolverError(ErrorCode::NonFiniteState, "non-finite state at t = " + std::to_string(t_next));
    }
    if (s_next < 0 || x_next < 0) {
      std::ostringstream msg;
      msg << "negative state at t = " << t_next << " (s = " << s_next << ", x = " << x_next << ")";
      throw SolverError(ErrorCode::PositivityViolation, msg.str());
    }
    tr.t.push_back(t_next);
    tr.s.push_back(s_next);
    tr.x.push_back(x_next);
    tr.int_mu.push_back(tr.int_mu[k] + h / 6 * (k1.mu + 2 * k2.mu + 2 * k3.mu + k4.mu));
    tr.int_D.push_back(tr.int_D[k] + h / 6 * (k1.D + 2 * k2.D + 2 * k3.D + k4.D));
  }
  const std::size_t last = tr.s.size() - 1;
  tr.ds.push_back(rhs(static_cast<double>(last) * h, tr.s[last], tr.x[last]).s);
  return tr;
}

PoincareImage poincare_map(const ChemostatModel& model, const HistoryFn& phi, double x0) {
  PoincareImage out{HistoryFn(phi.grid()), 0.0, integrate_dde(model, phi, x0, model.omega)};
  const Trajectory& tr = out.trajectory;
  const std::size_t last = tr.s.size() - 1;
  const StepPlan plan = step_plan(model);
  const UniformGrid& hg = phi.grid();
  const bool aligned = plan.aligned && hg.size() == plan.history_intervals + 1;
  for (std::size_t i = 0; i < hg.size(); ++i) {
    out.s_omega(i) = aligned ? tr.s[last - (hg.size() - 1) + i] : tr.s_at(model.omega + hg.node(i));
  }
  out.x_omega = tr.x[last];
  return out;
}

InnerFixedPoint inner_fixed_point(const ChemostatModel& model, double x0, double tol, int max_iter,
                                  const HistoryFn* start) {
  const HistoryFn initial = start ? *start : vstar_history(model, compute_vstar(model));
  OperatorFamily op{
      [&model](std::span<const double> c, const GridFn& w) {
        return poincare_map(model, w, c[0]).s_omega;
      },
      1, initial.grid(), 1};
  SolverOptions opts;
  opts.stall_window = max_iter;
  const SolveReport rep = picard_solve(op, std::span(&x0, 1), initial, tol, max_iter, 1.0, opts);
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "inner fixed point at x0 = " << x0 << " not reached in " << max_iter
        << " iterations (best residual " << rep.residual << ")";
    throw SolverError(ErrorCode::NoConvergence, msg.str());
  }
  return InnerFixedPoint{rep.solution, rep.residual, rep.iterations};
}

double phi_functional(const ChemostatModel& model, double x0, const HistoryFn& phi) {
  const Trajectory tr = integrate_dde(model, phi, x0, model.omega);
  const std::size_t last = tr.s.size() - 1;
  return (tr.int_mu[last] - tr.int_D[last]) / model.omega;
}

namespace {

NonexistenceCertificate margin_parts(const ChemostatModel& model) {
  const PeriodicSignal vstar = compute_vstar(model);
  const std::size_t n = vstar.size();
  const double h = vstar.step();
  double int_mu = 0.0;
  double int_D = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = static_cast<double>(k) * h;
    int_mu += detail::gauss([&](double t) { return model.mu(vstar.eval(t)); }, lo, lo + h);
    int_D += detail::gauss([&](double t) { return model.D.eval(t); }, lo, lo + h);
  }
  NonexistenceCertificate c;
  c.mean_mu_vstar = int_mu / model.omega;
  c.mean_D = int_D / model.omega;
  c.margin = c.mean_mu_vstar - c.mean_D;
  return c;
}

struct Probe {
  double x0;
  double phi;
  HistoryFn history;
};

}  // namespace

double existence_margin(const ChemostatModel& model) { return margin_parts(model).margin; }

std::variant<PeriodicOrbit, NonexistenceCertificate> find_periodic_orbit(
    const ChemostatModel& model, double x0_max, double tol) {
  if (!(x0_max > 0)) throw SolverError(ErrorCode::InvalidArgument, "x0_max must be positive");
  validate(model);
  const NonexistenceCertificate parts = margin_parts(model);
  if (parts.margin <= 0) return parts;

  const PeriodicSignal vstar = compute_vstar(model);
  const HistoryFn phi_star = vstar_history(model, vstar);
  auto probe = [&](double x0, const HistoryFn& warm) {
    InnerFixedPoint fp = inner_fixed_point(model, x0, 1e-9, 300, &warm);
    const double value = phi_functional(model, x0, fp.phi);
    return Probe{x0, value, std::move(fp.phi)};
  };

  double mean_Ds0 = 0.0;
  double mean_D = 0.0;
  const std::size_t nd = model.D.size();
  for (std::size_t k = 0; k < nd; ++k) {
    const double t = model.D.node(k);
    mean_Ds0 += model.D.sample_at(k) * model.s0.eval(t);
    mean_D += model.D.sample_at(k);
  }
  const double x_init = model.gamma * mean_Ds0 / mean_D;

  PeriodicOrbit orbit;
  Probe lo{0.0, parts.margin, phi_star};
  std::optional<Probe> hi;
  for (int k = 0;; ++k) {
    const double x0 = x_init * std::ldexp(1.0, k);
    if (x0 > x0_max) {
      std::ostringstream msg;
      msg << "functional stayed positive up to x0 = " << x0_max;
      throw SolverError(ErrorCode::ScanExhausted, msg.str());
    }
    Probe p = probe(x0, lo.history);
    ++orbit.scan_probes;
    if (p.phi < 0) {
      hi = std::move(p);
      break;
    }
    lo = std::move(p);
    if (std::abs(lo.phi) <= tol) break;
  }

  Probe best = lo;
  if (hi && std::abs(hi->phi) < std::abs(best.phi)) best = *hi;
  while (hi && std::abs(best.phi) > tol && orbit.bisection_steps < kMaxBisection) {
    const double mid = 0.5 * (lo.x0 + hi->x0);
    if (!(mid > lo.x0 && mid < hi->x0)) break;
    Probe p = probe(mid, lo.history);
    ++orbit.bisection_steps;
    if (std::abs(p.phi) < std::abs(best.phi)) best = p;
    if (p.phi > 0) {
      lo = std::move(p);
    } else {
      hi = std::move(p);
    }
  }

  PoincareImage img = poincare_map(model, best.history, best.x0);
  const Trajectory& tr = img.trajectory;
  const std::size_t last = tr.s.size() - 1;
  orbit.phi = best.history;
  orbit.x0 = best.x0;
  orbit.phi_value = (tr.int_mu[last] - tr.int_D[last]) / model.omega;
  orbit.poincare_residual =
      std::max(sup_distance(img.s_omega, best.history), std::abs(img.x_omega - best.x0));
  orbit.log_identity_defect =
      std::abs(std::log(img.x_omega) - std::log(best.x0) - model.omega * orbit.phi_value);

  const double x_floor = std::exp(-model.omega * (tr.int_D[last] / model.omega)) * best.x0;
  orbit.positivity_ok = true;
  orbit.below_vstar_ok = true;
  orbit.x_lower_bound_ok = true;
  for (std::size_t k = 1; k <= last; ++k) {
    if (!(tr.s[k] > 0 && tr.x[k] > 0)) orbit.positivity_ok = false;
    if (!(tr.s[k] < vstar.sample_at(k % vstar.size()))) orbit.below_vstar_ok = false;
    if (!(tr.x[k] > x_floor)) orbit.x_lower_bound_ok = false;
  }
  orbit.trajectory = std::move(img.trajectory);
  return orbit;
}

}  // namespace bvpcont
