#include "bvpcont/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string_view>

#include "bvpcont/errors.hpp"
#include "bvpcont/linear_solvers.hpp"

namespace bvpcont {
namespace {

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double forcing_at(const PeriodicSignal& p, double t, std::size_t d) {
  return p.eval(t, p.dim() == 1 ? 0 : d);
}

double g_scalar(const ResonantProblem& prob, double u) {
  double out = 0.0;
  prob.g(std::span(&u, 1), std::span(&out, 1));
  return out;
}

void require_scalar(const ResonantProblem& prob, const char* what) {
  if (prob.dim != 1) {
    throw SolverError(ErrorCode::InvalidArgument, std::string(what) + " needs a scalar problem");
  }
}

double limit_scale(const ResonantProblem& prob) {
  for (int k = 0; k <= 30; ++k) {
    const double M = std::ldexp(1.0, k);
    if (std::abs(g_scalar(prob, M) - prob.g_plus) <= 1e-3 &&
        std::abs(g_scalar(prob, -M) - prob.g_minus) <= 1e-3) {
      return M;
    }
  }
  throw SolverError(ErrorCode::InvalidArgument,
                    "g does not approach its declared limits within 1e-3 for |u| <= 2^30");
}

GridFn solution_from_state(const OperatorFamily& op, double c, const GridFn& state) {
  return op(c, state) + c;
}

}  // namespace

double effective_g_sup(const ResonantProblem& prob) {
  if (prob.g_sup) return *prob.g_sup;
  std::vector<double> u(prob.dim), out(prob.dim);
  double m = 0.0;
  auto span_for = [&](std::size_t d) -> std::pair<double, double> {
    if (prob.g_class == NonlinearityClass::Periodic && d < prob.periods.size()) {
      return {0.0, prob.periods[d]};
    }
    return {-100.0, 100.0};
  };
  if (prob.dim == 1) {
    const auto [lo, hi] = span_for(0);
    for (int i = 0; i <= 20000; ++i) {
      u[0] = lo + (hi - lo) * i / 20000.0;
      prob.g(u, out);
      m = std::max(m, sup_abs(out));
    }
  } else {
    const auto [lo0, hi0] = span_for(0);
    const auto [lo1, hi1] = span_for(1);
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) {
        u[0] = lo0 + (hi0 - lo0) * i / 400.0;
        u[1] = lo1 + (hi1 - lo1) * j / 400.0;
        prob.g(u, out);
        m = std::max(m, sup_abs(out));
      }
    }
  }
  if (prob.g_class == NonlinearityClass::LandesmanLazer) {
    m = std::max({m, std::abs(prob.g_minus), std::abs(prob.g_plus)});
  }
  return m;
}

double resonance_radius(const ResonantProblem& prob) {
  const UniformGrid grid = prob.grid();
  const double k = solve_two_point_damped(GridFn::constant(grid, 1, 1.0), prob.a).sup_norm();
  return k * (2 * effective_g_sup(prob) + prob.p0.zero_mean().sup_norm());
}

OperatorFamily resonance_operator(const ResonantProblem& prob) {
  const UniformGrid grid = prob.grid();
  const std::size_t dim = prob.dim;
  const std::size_t n = grid.size();
  const PeriodicSignal p0 = prob.p0.zero_mean();
  if (p0.dim() != 1 && p0.dim() != dim) {
    throw SolverError(ErrorCode::InvalidArgument, "forcing dimension does not match the problem");
  }
  GridFn forcing(grid, dim);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t d = 0; d < dim; ++d) forcing(k, d) = forcing_at(p0, grid.node(k), d);
  }
  auto evaluate = [g = prob.g, forcing, grid, dim, n, a = prob.a](std::span<const double> c,
                                                                  const GridFn& w) {
    GridFn load(grid, dim);
    std::vector<double> u(dim);
    std::vector<double> mean(dim, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t d = 0; d < dim; ++d) u[d] = w(k, d) + c[d];
      auto gk = load.at(k);
      g(u, gk);
      if (k + 1 < n) {
        for (std::size_t d = 0; d < dim; ++d) mean[d] += gk[d];
      }
    }
    for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t d = 0; d < dim; ++d) load(k, d) = forcing(k, d) - load(k, d) + mean[d];
    }
    return solve_two_point_damped(load, a);
  };
  return OperatorFamily{evaluate, dim, grid, dim, resonance_radius(prob)};
}

std::vector<double> mean_nonlinearity(std::span<const double> c, const GridFn& w,
                                      const ResonantProblem& prob) {
  const std::size_t dim = prob.dim;
  const std::size_t n = w.size();
  std::vector<double> u(dim), out(dim), mean(dim, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    for (std::size_t d = 0; d < dim; ++d) u[d] = w(k, d) + c[d];
    prob.g(u, out);
    for (std::size_t d = 0; d < dim; ++d) mean[d] += out[d];
  }
  for (double& m : mean) m /= static_cast<double>(n - 1);
  return mean;
}

double mean_nonlinearity(double c, const GridFn& w, const ResonantProblem& prob) {
  return mean_nonlinearity(std::span(&c, 1), w, prob)[0];
}

std::pair<double, double> auto_window(const ResonantProblem& prob) {
  switch (prob.g_class) {
    case NonlinearityClass::Periodic:
      if (prob.periods.empty() || !(prob.periods[0] > 0)) {
        throw SolverError(ErrorCode::InvalidArgument, "periodic g needs a positive period");
      }
      return {0.0, prob.periods[0]};
    case NonlinearityClass::LandesmanLazer: {
      const double extent = resonance_radius(prob) + limit_scale(prob);
      return {-extent, extent};
    }
    case NonlinearityClass::GenericBounded:
      break;
  }
  throw SolverError(ErrorCode::InvalidArgument, "generic bounded g needs an explicit c window");
}

IntervalEstimate compute_range(const ResonantProblem& prob, const RangeOptions& opts,
                               Branch* branch_out) {
  require_scalar(prob, "compute_range");
  const auto [w_lo, w_hi] = opts.window ? *opts.window : auto_window(prob);
  const OperatorFamily op = resonance_operator(prob);
  const Functional mean_of = [&prob](double c, const GridFn& w) {
    return mean_nonlinearity(c, w, prob);
  };
  const Branch branch = trace_branch(op, mean_of, w_lo, w_hi, opts.steps, opts.solver);
  if (branch_out) *branch_out = branch;

  IntervalEstimate est;
  est.window_relative = prob.g_class == NonlinearityClass::GenericBounded;
  for (const auto& p : branch.points) est.samples.push_back({p.c, p.phi});

  const bool clamp = est.window_relative;
  const double lo_c = std::min(w_lo, w_hi);
  const double hi_c = std::max(w_lo, w_hi);
  const double spacing = (hi_c - lo_c) / (opts.steps - 1);

  auto refine = [&](bool maximize) {
    const auto& pts = branch.points;
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (maximize ? pts[i].phi > pts[best_i].phi : pts[i].phi < pts[best_i].phi) best_i = i;
    }
    double best_c = pts[best_i].c;
    double best_v = pts[best_i].phi;
    GridFn best_state = pts[best_i].state;
    double h = spacing;
    double improvement = 0.0;
    for (int round = 0; round < opts.refine_rounds; ++round) {
      const double before = best_v;
      const GridFn center_state = best_state;
      const double center = best_c;
      for (double c : {center - 0.5 * h, center + 0.5 * h}) {
        if (clamp && (c < lo_c || c > hi_c)) continue;
        const SolveReport rep = solve_fixed_point(op, c, center_state, opts.solver);
        if (!rep.converged) {
          throw SolverError(ErrorCode::UnresolvedBranch,
                            "fixed point solve failed while refining at c = " + std::to_string(c));
        }
        const double v = mean_nonlinearity(c, rep.solution, prob);
        est.samples.push_back({c, v});
        if (maximize ? v > best_v : v < best_v) {
          best_v = v;
          best_c = c;
          best_state = rep.solution;
        }
      }
      improvement = std::abs(best_v - before);
      h *= 0.5;
    }
    return std::pair{best_v, improvement};
  };

  const auto [hi, tol_hi] = refine(true);
  const auto [lo, tol_lo] = refine(false);
  est.lo = lo;
  est.hi = hi;
  est.tol = std::max(tol_hi, tol_lo);
  return est;
}

PeriodicSolution verify_periodic(const ResonantProblem& prob, double s, double c, GridFn u) {
  const std::size_t n = u.size();
  const std::size_t dim = u.dim();
  const double h = u.grid().step();
  const double a = prob.a;
  const PeriodicSignal p0 = prob.p0.zero_mean();
  std::vector<double> gu(dim);
  PeriodicSolution out;
  out.c = c;

  double eq = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    prob.g(u.at(k), gu);
    const double t = u.grid().node(k);
    for (std::size_t d = 0; d < dim; ++d) {
      const double dd = (u(k + 1, d) - 2 * u(k, d) + u(k - 1, d)) / (h * h);
      const double d1 = (u(k + 1, d) - u(k - 1, d)) / (2 * h);
      eq = std::max(eq, std::abs(dd + a * d1 + gu[d] - forcing_at(p0, t, d) - s));
    }
  }
  out.equation_residual = eq;

  double closure = 0.0;
  std::vector<double> g0(dim), g1(dim);
  prob.g(u.at(0), g0);
  prob.g(u.at(n - 1), g1);
  for (std::size_t d = 0; d < dim; ++d) {
    const double rhs0 = forcing_at(p0, 0.0, d) + s - g0[d];
    const double ghost_left =
        (rhs0 - (u(1, d) - 2 * u(0, d)) / (h * h) - a * u(1, d) / (2 * h)) /
        (1 / (h * h) - a / (2 * h));
    const double rhs1 = forcing_at(p0, prob.omega, d) + s - g1[d];
    const double ghost_right =
        (rhs1 - (u(n - 2, d) - 2 * u(n - 1, d)) / (h * h) + a * u(n - 2, d) / (2 * h)) /
        (1 / (h * h) + a / (2 * h));
    const double du0 = (u(1, d) - ghost_left) / (2 * h);
    const double du1 = (ghost_right - u(n - 2, d)) / (2 * h);
    closure = std::max(closure, std::abs(u(0, d) - u(n - 1, d)) + std::abs(du0 - du1));
  }
  out.closure = closure;

  const std::vector<double> zero(dim, 0.0);
  const auto m = mean_nonlinearity(zero, u, prob);
  double defect = 0.0;
  for (double v : m) defect = std::max(defect, std::abs(v - s));
  out.mean_defect = defect;
  out.u = std::move(u);
  return out;
}

PeriodicSolution solve_for_s(const ResonantProblem& prob, double s, const RangeOptions& opts,
                             Branch* branch_out) {
  require_scalar(prob, "solve_for_s");
  std::pair<double, double> window;
  if (opts.window) {
    window = *opts.window;
  } else if (prob.g_class == NonlinearityClass::LandesmanLazer) {
    double M = limit_scale(prob);
    for (int k = 0; k <= 30; ++k) {
      const double m = std::ldexp(1.0, k);
      if (g_scalar(prob, m) > s && g_scalar(prob, -m) < s) {
        M = std::max(M, m);
        break;
      }
    }
    const double extent = resonance_radius(prob) + M;
    window = {-extent, extent};
  } else {
    window = auto_window(prob);
  }
  const OperatorFamily op = resonance_operator(prob);
  const Functional phi = [&prob, s](double c, const GridFn& w) {
    return s - mean_nonlinearity(c, w, prob);
  };
  const Branch branch = trace_branch(op, phi, window.first, window.second, opts.steps, opts.solver);
  if (branch_out) *branch_out = branch;
  PhiRoot root;
  try {
    root = find_phi_root(branch, op, phi, 1e-10, opts.solver);
  } catch (const SolverError& e) {
    if (e.code() != ErrorCode::NoSignChange) throw;
    std::ostringstream msg;
    std::string_view base = e.what();
    const std::string_view prefix = to_string(ErrorCode::NoSignChange);
    if (base.starts_with(prefix)) base.remove_prefix(prefix.size() + 2);
    msg << base << "; s = " << s << " must lie in the range of mean g(c + v_c)";
    if (prob.g_class == NonlinearityClass::LandesmanLazer) {
      msg << ", necessary condition g_- < s < g_+ with (g_-, g_+) = (" << prob.g_minus << ", "
          << prob.g_plus << ")";
    }
    throw SolverError(ErrorCode::NoSignChange, msg.str());
  }
  return verify_periodic(prob, s, root.c, solution_from_state(op, root.c, root.state));
}

WirtingerCheck check_wirtinger(const ResonantProblem& prob, double radius, std::size_t n_samples) {
  WirtingerCheck out;
  const double base = 2 * std::numbers::pi / prob.omega;
  out.threshold = base * base;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-radius, radius);
  const std::size_t dim = prob.dim;
  std::vector<double> u(dim), v(dim), gu(dim), gv(dim);
  double sup = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      u[d] = dist(rng);
      v[d] = dist(rng);
    }
    double dot = 0.0;
    double norm2 = 0.0;
    prob.g(u, gu);
    prob.g(v, gv);
    for (std::size_t d = 0; d < dim; ++d) {
      dot += (gu[d] - gv[d]) * (u[d] - v[d]);
      norm2 += (u[d] - v[d]) * (u[d] - v[d]);
    }
    if (norm2 < 1e-24) continue;
    sup = std::max(sup, dot / norm2);
  }
  out.sup_quotient = sup;
  out.holds = sup < out.threshold - 1e-9;
  return out;
}

NonintersectionResult nonintersection_check(const Branch& branch) {
  std::vector<const BranchPoint*> pts;
  for (const auto& p : branch.points) pts.push_back(&p);
  std::sort(pts.begin(), pts.end(), [](auto* x, auto* y) { return x->c < y->c; });
  NonintersectionResult out;
  out.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const GridFn& vi = pts[i]->state;
      const GridFn& vj = pts[j]->state;
      for (std::size_t k = 0; k < vi.size(); ++k) {
        out.min_gap = std::min(out.min_gap, (pts[j]->c + vj(k)) - (pts[i]->c + vi(k)));
      }
    }
  }
  out.holds = out.min_gap > 0;
  return out;
}

std::vector<SolutionGroup> multistart_geometric(const ResonantProblem& prob, double s,
                                                const RangeOptions& opts) {
  if (prob.g_class != NonlinearityClass::Periodic || prob.periods.empty()) {
    throw SolverError(ErrorCode::InvalidArgument, "multistart needs a periodic g");
  }
  const double sigma = prob.periods[0];
  std::vector<SolutionGroup> groups;
  // A window on which the functional vanishes everywhere carries a continuum
  // of solutions spanning a full period, so all such windows form one group.
  std::optional<std::size_t> continuum;
  for (int j = 0; j < 8; ++j) {
    RangeOptions o = opts;
    o.window = std::pair{j * sigma / 4, j * sigma / 4 + sigma};
    PeriodicSolution sol;
    Branch branch;
    try {
      sol = solve_for_s(prob, s, o, &branch);
    } catch (const SolverError& e) {
      if (e.code() == ErrorCode::NoSignChange) continue;
      throw;
    }
    const bool degenerate = std::all_of(branch.points.begin(), branch.points.end(),
                                        [](const BranchPoint& pt) { return std::abs(pt.phi) <= 1e-10; });
    if (degenerate) {
      if (continuum) {
        ++groups[*continuum].members;
      } else {
        continuum = groups.size();
        groups.push_back(SolutionGroup{std::move(sol), 1});
      }
      continue;
    }
    bool placed = false;
    for (auto& grp : groups) {
      const GridFn& ref = grp.representative.u;
      double mean_diff = 0.0;
      for (std::size_t k = 0; k + 1 < ref.size(); ++k) mean_diff += sol.u(k) - ref(k);
      mean_diff /= static_cast<double>(ref.size() - 1);
      const double shift = std::round(mean_diff / sigma) * sigma;
      double dist = 0.0;
      for (std::size_t k = 0; k < ref.size(); ++k) {
        dist = std::max(dist, std::abs(sol.u(k) - ref(k) - shift));
      }
      if (dist <= 1e-4) {
        ++grp.members;
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back(SolutionGroup{std::move(sol), 1});
  }
  if (groups.empty()) {
    throw SolverError(ErrorCode::NoSignChange, "no window produced a solution for s");
  }
  return groups;
}

bool check_landesman_lazer_limits(const ResonantProblem& prob) {
  require_scalar(prob, "check_landesman_lazer_limits");
  return std::abs(g_scalar(prob, 1e6) - prob.g_plus) <= 1e-3 &&
         std::abs(g_scalar(prob, -1e6) - prob.g_minus) <= 1e-3;
}

}  // namespace bvpcont
