#include "bvpcont/fixed_point.hpp"

#include <cmath>
#include <string>

#include "bvpcont/errors.hpp"

namespace bvpcont {
namespace {

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

SolveReport picard_solve(const OperatorFamily& op, std::span<const double> c, GridFn v0,
                         double tol, int max_iter, double damping, const SolverOptions& opts) {
  if (!(tol > 0)) throw SolverError(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!(damping > 0 && damping <= 1)) {
    throw SolverError(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
  }
  GridFn v = std::move(v0);
  double d = damping;
  double previous = std::numeric_limits<double>::infinity();
  SolveReport best{v, std::numeric_limits<double>::infinity(), 0, false, "picard"};
  int last_improvement = 0;
  for (int it = 0; it <= max_iter; ++it) {
    GridFn tv = op(c, v);
    if (!tv.is_finite()) {
      throw SolverError(ErrorCode::NonFinite, "operator produced non-finite values");
    }
    const double r = sup_distance(v, tv);
    if (r < best.residual) {
      best.solution = v;
      best.residual = r;
      best.iterations = it;
      last_improvement = it;
    }
    if (r <= tol) {
      best.converged = true;
      return best;
    }
    if (it == max_iter || it - last_improvement > opts.stall_window) break;
    if (r > previous && d > opts.min_damping) d = std::max(0.5 * d, opts.min_damping);
    previous = r;
    v *= (1.0 - d);
    tv *= d;
    v += tv;
  }
  return best;
}

SystemReport newton_system(const SystemResidual& residual, Eigen::VectorXd x0, double tol,
                           int max_iter) {
  SystemReport rep;
  rep.x = std::move(x0);
  Eigen::VectorXd f = residual(rep.x);
  if (!all_finite(f)) throw SolverError(ErrorCode::NonFinite, "residual is not finite at the start");
  rep.residual = sup_norm(f);
  const Eigen::Index n = rep.x.size();
  for (int it = 0; it < max_iter; ++it) {
    if (rep.residual <= tol) {
      rep.converged = true;
      return rep;
    }
    const double eps = 1e-6 * (1.0 + sup_norm(rep.x));
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd probe = rep.x;
    for (Eigen::Index j = 0; j < n; ++j) {
      probe[j] += eps;
      jac.col(j) = (residual(probe) - f) / eps;
      probe[j] = rep.x[j];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    if (!(lu.rcond() > 1e-14)) {
      throw SolverError(ErrorCode::SingularJacobian,
                        "Jacobian reciprocal condition " + std::to_string(lu.rcond()));
    }
    const Eigen::VectorXd step = lu.solve(-f);
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 20; ++halving, lambda *= 0.5) {
      Eigen::VectorXd trial = rep.x + lambda * step;
      Eigen::VectorXd ft = residual(trial);
      if (!all_finite(ft)) continue;
      const double rt = sup_norm(ft);
      if (rt < rep.residual) {
        rep.x = std::move(trial);
        f = std::move(ft);
        rep.residual = rt;
        accepted = true;
        break;
      }
    }
    rep.iterations = it + 1;
    if (!accepted) {
      throw SolverError(ErrorCode::NoDescent,
                        "no residual decrease after 20 halvings (residual " +
                            std::to_string(rep.residual) + ")");
    }
  }
  rep.converged = rep.residual <= tol;
  return rep;
}

SolveReport newton_solve(const OperatorFamily& op, std::span<const double> c, GridFn v0,
                         double tol, int max_iter) {
  const UniformGrid grid = v0.grid();
  const std::size_t dim = v0.dim();
  const auto n = static_cast<Eigen::Index>(v0.values().size());
  auto to_grid = [&](const Eigen::VectorXd& x) {
    return GridFn(grid, dim, std::vector<double>(x.data(), x.data() + n));
  };
  SystemResidual residual = [&](const Eigen::VectorXd& x) {
    const GridFn v = to_grid(x);
    const GridFn tv = op(c, v);
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) f[i] = x[i] - tv.values()[static_cast<std::size_t>(i)];
    return f;
  };
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v0.values().data(), n);
  SystemReport sys = newton_system(residual, std::move(x), tol, max_iter);
  return SolveReport{to_grid(sys.x), sys.residual, sys.iterations, sys.converged, "newton"};
}

SolveReport solve_fixed_point(const OperatorFamily& op, std::span<const double> c,
                              const GridFn& v0, const SolverOptions& opts) {
  SolveReport rep = picard_solve(op, c, v0, opts.tol, opts.picard_max_iter, opts.damping, opts);
  if (rep.converged || !opts.newton_fallback) return rep;
  try {
    SolveReport nrep = newton_solve(op, c, rep.solution, opts.tol, opts.newton_max_iter);
    nrep.iterations += rep.iterations;
    if (nrep.converged || nrep.residual < rep.residual) return nrep;
  } catch (const SolverError& e) {
    if (e.code() != ErrorCode::SingularJacobian && e.code() != ErrorCode::NoDescent) throw;
  }
  return rep;
}

}  // namespace bvpcont
