#include "bvpcont/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bvpcont/errors.hpp"
#include "bvpcont/linear_solvers.hpp"

namespace bvpcont {
namespace {

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::size_t center_index(const GridFn& w) { return (w.size() - 1) / 2; }

double sampled_f_sup(const NonlocalProblem& prob, double half_width) {
  const UniformGrid tg(-prob.half_length, prob.half_length, 201);
  std::vector<double> u(prob.dim), out(prob.dim);
  double m = 0.0;
  if (prob.dim == 1) {
    for (std::size_t i = 0; i < tg.size(); ++i) {
      for (int j = 0; j <= 200; ++j) {
        u[0] = -half_width + 2 * half_width * j / 200.0;
        prob.f(tg.node(i), u, out);
        m = std::max(m, sup_abs(out));
      }
    }
    return m;
  }
  for (std::size_t i = 0; i < tg.size(); ++i) {
    for (int j = 0; j <= 40; ++j) {
      for (int l = 0; l <= 40; ++l) {
        u[0] = -half_width + 2 * half_width * j / 40.0;
        u[1] = -half_width + 2 * half_width * l / 40.0;
        prob.f(tg.node(i), u, out);
        m = std::max(m, sup_abs(out));
      }
    }
  }
  return m;
}

double g_scalar(const NonlocalProblem& prob, double u) {
  double out = 0.0;
  prob.g(std::span(&u, 1), std::span(&out, 1));
  return out;
}

std::vector<double> r_samples(double radius) {
  std::vector<double> r(101);
  for (int i = 0; i <= 100; ++i) r[static_cast<std::size_t>(i)] = -radius + 2 * radius * i / 100.0;
  return r;
}

}  // namespace

FieldFn scalar_field(std::function<double(double, double)> f) {
  return [f = std::move(f)](double t, std::span<const double> u, std::span<double> out) {
    out[0] = f(t, u[0]);
  };
}

VectorMap scalar_map(std::function<double(double)> g) {
  return [g = std::move(g)](std::span<const double> u, std::span<double> out) { out[0] = g(u[0]); };
}

double relaxed_solution_bound(const NonlocalProblem& prob) {
  if (!prob.relaxed) throw SolverError(ErrorCode::InvalidArgument, "no relaxed growth constants declared");
  const auto& r = *prob.relaxed;
  const double k = dirichlet_bound_constant(prob.half_length);
  const double denom = 1.0 - k * r.eps - r.A;
  if (!(denom > 0)) {
    throw SolverError(ErrorCode::InvalidArgument, "relaxed growth needs k*eps + A < 1");
  }
  return (k * r.C + r.B) / denom;
}

double effective_f_sup(const NonlocalProblem& prob) {
  if (prob.f_sup) return *prob.f_sup;
  if (prob.relaxed) return prob.relaxed->eps * relaxed_solution_bound(prob) + prob.relaxed->C;
  double width = prob.working_range;
  if (prob.growth == GrowthClass::UserBracket) {
    width += std::abs(prob.bracket.first) + std::abs(prob.bracket.second);
  }
  const double k = dirichlet_bound_constant(prob.half_length);
  const double first = sampled_f_sup(prob, width);
  return sampled_f_sup(prob, width + 2 * k * first);
}

double nonlocal_radius(const NonlocalProblem& prob) {
  return dirichlet_bound_constant(prob.half_length) * effective_f_sup(prob);
}

OperatorFamily nonlocal_operator(const NonlocalProblem& prob) {
  const UniformGrid grid = prob.grid();
  const std::size_t dim = prob.dim;
  auto evaluate = [f = prob.f, grid, dim](std::span<const double> c, const GridFn& w) {
    GridFn load(grid, dim);
    std::vector<double> u(dim);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t d = 0; d < dim; ++d) u[d] = w(k, d) + c[d];
      f(grid.node(k), u, load.at(k));
    }
    return solve_dirichlet(load);
  };
  return OperatorFamily{evaluate, dim, grid, dim, nonlocal_radius(prob)};
}

double nonlocal_phi(double c, const GridFn& w, const NonlocalProblem& prob) {
  return c - g_scalar(prob, w(center_index(w)) + c);
}

std::pair<double, double> choose_bracket(const NonlocalProblem& prob) {
  const double radius = nonlocal_radius(prob);
  const auto rs = r_samples(radius);
  auto min_g = [&](double c) {
    double m = std::numeric_limits<double>::infinity();
    for (double r : rs) m = std::min(m, g_scalar(prob, c + r));
    return m;
  };
  auto max_g = [&](double c) {
    double m = -std::numeric_limits<double>::infinity();
    for (double r : rs) m = std::max(m, g_scalar(prob, c + r));
    return m;
  };
  switch (prob.growth) {
    case GrowthClass::UserBracket: {
      const auto [a, b] = prob.bracket;
      if (!(max_g(a) <= a) || !(min_g(b) >= b)) {
        std::ostringstream msg;
        msg << "declared bracket (" << a << ", " << b << ") violates g(a+r) <= a, g(b+r) >= b";
        throw SolverError(ErrorCode::BracketNotFound, msg.str());
      }
      return {a, b};
    }
    case GrowthClass::Superlinear:
    case GrowthClass::BoundedSublinear: {
      const bool super = prob.growth == GrowthClass::Superlinear;
      double c = radius + 1.0;
      for (int k = 0; k <= 20; ++k, c *= 2) {
        const bool ok = super ? (min_g(c) > c && max_g(-c) < -c)
                              : (max_g(c) < c && min_g(-c) > -c);
        if (ok) return {-c, c};
      }
      throw SolverError(ErrorCode::BracketNotFound,
                        super ? "superlinear growth scan exhausted" : "sublinear growth scan exhausted");
    }
    case GrowthClass::PlanarDegree:
      break;
  }
  throw SolverError(ErrorCode::InvalidArgument, "planar problems have no scalar bracket");
}

std::pair<double, double> nonlocal_residuals(const NonlocalProblem& prob, const GridFn& u) {
  const std::size_t n = u.size();
  const std::size_t dim = u.dim();
  const double h = u.grid().step();
  std::vector<double> out(dim), gu(dim);
  double eq = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    prob.f(u.grid().node(k), u.at(k), out);
    for (std::size_t d = 0; d < dim; ++d) {
      const double dd = (u(k + 1, d) - 2 * u(k, d) + u(k - 1, d)) / (h * h);
      eq = std::max(eq, std::abs(dd - out[d]));
    }
  }
  prob.g(u.at(center_index(u)), gu);
  double bc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    bc = std::max({bc, std::abs(u(0, d) - gu[d]), std::abs(u(n - 1, d) - gu[d])});
  }
  return {eq, bc};
}

std::vector<NonlocalSolution> solve_nonlocal(const NonlocalProblem& prob,
                                             const NonlocalSolveOptions& opts,
                                             Branch* branch_out) {
  if (prob.dim != 1) throw SolverError(ErrorCode::InvalidArgument, "solve_nonlocal is scalar only");
  const auto [a, b] = choose_bracket(prob);
  const OperatorFamily op = nonlocal_operator(prob);
  const Functional phi = [&prob](double c, const GridFn& w) { return nonlocal_phi(c, w, prob); };
  const Branch branch = trace_branch(op, phi, std::min(a, b), std::max(a, b), opts.steps, opts.solver);
  if (branch_out) *branch_out = branch;
  // g is evaluated at u(0), so steep g amplifies the fixed-point error; refine roots tighter.
  SolverOptions refine = opts.solver;
  refine.tol = std::min(refine.tol, 1e-13);
  const auto roots = find_phi_roots(branch, op, phi, opts.tol_c, refine);
  if (roots.empty()) {
    throw SolverError(ErrorCode::NoSignChange, "no sign change of c - g(v(0)+c) in the bracket");
  }
  std::vector<NonlocalSolution> out;
  for (const auto& root : roots) {
    GridFn u = op(root.c, root.state) + root.c;
    const auto [eq, bc] = nonlocal_residuals(prob, u);
    out.push_back(NonlocalSolution{{root.c}, std::move(u), eq, bc});
  }
  return out;
}

PlanarSolution solve_nonlocal_planar(const NonlocalProblem& prob, int multistart_grid, double tol) {
  if (prob.dim != 2) throw SolverError(ErrorCode::InvalidArgument, "planar solve needs dim = 2");
  const Rectangle& D = prob.region;
  const double radius = nonlocal_radius(prob);

  auto g2 = [&](double x, double y) {
    std::array<double, 2> in{x, y}, out{};
    prob.g(in, out);
    return out;
  };

  // Hypothesis (1): g(r + c) != c for c on the boundary and |r| <= R.
  std::vector<std::array<double, 2>> rs{{0.0, 0.0}};
  for (int i = 1; i <= 5; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double rho = radius * i / 5.0;
      const double th = 2 * std::numbers::pi * j / 8.0;
      rs.push_back({rho * std::cos(th), rho * std::sin(th)});
    }
  }
  const double wx = D.x_hi - D.x_lo;
  const double wy = D.y_hi - D.y_lo;
  const double perimeter = 2 * (wx + wy);
  for (int i = 0; i < 201; ++i) {
    double s = perimeter * i / 201.0;
    std::array<double, 2> c;
    if (s <= wx) {
      c = {D.x_lo + s, D.y_lo};
    } else if ((s -= wx) <= wy) {
      c = {D.x_hi, D.y_lo + s};
    } else if ((s -= wy) <= wx) {
      c = {D.x_hi - s, D.y_hi};
    } else {
      c = {D.x_lo, D.y_hi - (s - wx)};
    }
    for (const auto& r : rs) {
      const auto gv = g2(c[0] + r[0], c[1] + r[1]);
      if (std::max(std::abs(gv[0] - c[0]), std::abs(gv[1] - c[1])) <= 1e-9) {
        std::ostringstream msg;
        msg << "hypothesis 1: g(r + c) = c at c = (" << c[0] << ", " << c[1] << "), r = (" << r[0]
            << ", " << r[1] << ")";
        throw SolverError(ErrorCode::HypothesisFailed, msg.str());
      }
    }
  }

  // Hypothesis (2): non-zero winding of c - g(c) along the boundary.
  const int winding = winding_number(
      [&](double x, double y) {
        const auto gv = g2(x, y);
        return std::array<double, 2>{x - gv[0], y - gv[1]};
      },
      D, 256);
  if (winding == 0) {
    throw SolverError(ErrorCode::HypothesisFailed, "hypothesis 2: winding of c - g(c) is zero");
  }

  const OperatorFamily op = nonlocal_operator(prob);
  const UniformGrid grid = op.grid;
  const std::size_t n = grid.size();
  const std::size_t center = (n - 1) / 2;
  const auto unknowns = static_cast<Eigen::Index>(2 + 2 * n);
  auto unpack = [&](const Eigen::VectorXd& x) {
    return GridFn(grid, 2, std::vector<double>(x.data() + 2, x.data() + unknowns));
  };
  SystemResidual residual = [&](const Eigen::VectorXd& x) {
    const std::array<double, 2> c{x[0], x[1]};
    const GridFn v = unpack(x);
    const GridFn tv = op(c, v);
    const auto gv = g2(v(center, 0) + c[0], v(center, 1) + c[1]);
    Eigen::VectorXd f(unknowns);
    f[0] = c[0] - gv[0];
    f[1] = c[1] - gv[1];
    for (std::size_t i = 0; i < 2 * n; ++i) f[static_cast<Eigen::Index>(i) + 2] = x[static_cast<Eigen::Index>(i) + 2] - tv.values()[i];
    return f;
  };

  int tried = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < multistart_grid; ++i) {
    for (int j = 0; j < multistart_grid; ++j) {
      ++tried;
      Eigen::VectorXd x0 = Eigen::VectorXd::Zero(unknowns);
      x0[0] = D.x_lo + wx * (i + 0.5) / multistart_grid;
      x0[1] = D.y_lo + wy * (j + 0.5) / multistart_grid;
      SystemReport rep;
      try {
        rep = newton_system(residual, x0, tol, 50);
      } catch (const SolverError& e) {
        if (e.code() == ErrorCode::SingularJacobian || e.code() == ErrorCode::NoDescent) continue;
        throw;
      }
      best = std::min(best, rep.residual);
      if (!rep.converged) continue;
      const std::array<double, 2> c{rep.x[0], rep.x[1]};
      if (c[0] < D.x_lo || c[0] > D.x_hi || c[1] < D.y_lo || c[1] > D.y_hi) continue;
      GridFn u = op(c, unpack(rep.x));
      for (std::size_t k = 0; k < n; ++k) {
        u(k, 0) += c[0];
        u(k, 1) += c[1];
      }
      const auto [eq, bc] = nonlocal_residuals(prob, u);
      if (eq <= 1e-6 && bc <= 1e-8) {
        return PlanarSolution{NonlocalSolution{{c[0], c[1]}, std::move(u), eq, bc}, winding, tried};
      }
    }
  }
  throw SolverError(ErrorCode::NoSolutionFound,
                    "no verified solution after " + std::to_string(tried) +
                        " starts (best residual " + std::to_string(best) + ")");
}

}  // namespace bvpcont
