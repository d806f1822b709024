#include "bvpcont/linear_solvers.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "bvpcont/errors.hpp"
#include "quadrature.hpp"

namespace bvpcont {
namespace {

using detail::gauss;

// Constant-coefficient tridiagonal sweep for the interior unknowns
// v_1..v_{n-2}; boundary values are zero.
void tridiagonal_interior(double lower, double diag, double upper, std::span<const double> rhs,
                          std::span<double> out) {
  const std::size_t m = rhs.size();
  std::vector<double> c(m), d(m);
  double pivot = diag;
  if (std::abs(pivot) < 1e-300) throw SolverError(ErrorCode::SingularSystem, "zero pivot");
  c[0] = upper / pivot;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < m; ++i) {
    pivot = diag - lower * c[i - 1];
    if (std::abs(pivot) < 1e-14 * std::abs(diag)) {
      throw SolverError(ErrorCode::SingularSystem,
                        "banded system singular at row " + std::to_string(i));
    }
    c[i] = upper / pivot;
    d[i] = (rhs[i] - lower * d[i - 1]) / pivot;
  }
  out[m - 1] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) out[i] = d[i] - c[i] * out[i + 1];
}

GridFn solve_banded(const GridFn& load, double damping) {
  const std::size_t n = load.size();
  if (n < 3) throw SolverError(ErrorCode::DegenerateGrid, "need at least three nodes");
  const double h = load.grid().step();
  const double lower = 1.0 / (h * h) - damping / (2 * h);
  const double diag = -2.0 / (h * h);
  const double upper = 1.0 / (h * h) + damping / (2 * h);
  GridFn out(load.grid(), load.dim());
  std::vector<double> rhs(n - 2), sol(n - 2);
  for (std::size_t d = 0; d < load.dim(); ++d) {
    for (std::size_t k = 1; k + 1 < n; ++k) rhs[k - 1] = load(k, d);
    tridiagonal_interior(lower, diag, upper, rhs, sol);
    for (std::size_t k = 1; k + 1 < n; ++k) out(k, d) = sol[k - 1];
  }
  return out;
}

}  // namespace

GridFn solve_dirichlet(const GridFn& load) { return solve_banded(load, 0.0); }

GridFn solve_two_point_damped(const GridFn& load, double damping) {
  return solve_banded(load, damping);
}

EndpointSlopes endpoint_slopes(const GridFn& f, std::size_t d) {
  const std::size_t n = f.size();
  if (n < 3) throw SolverError(ErrorCode::DegenerateGrid, "need at least three nodes");
  const double h = f.grid().step();
  return {(-3 * f(0, d) + 4 * f(1, d) - f(2, d)) / (2 * h),
          (3 * f(n - 1, d) - 4 * f(n - 2, d) + f(n - 3, d)) / (2 * h)};
}

PeriodicSignal solve_periodic_first_order(double period, std::size_t n_samples,
                                          const std::function<double(double)>& decay,
                                          const std::function<double(double)>& source) {
  if (n_samples == 0) throw SolverError(ErrorCode::EmptyInput, "no samples requested");
  const double h = period / static_cast<double>(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    if (!(decay(static_cast<double>(k) * h) > 0)) {
      throw SolverError(ErrorCode::InvalidArgument, "decay coefficient must be positive");
    }
  }
  // Interval k propagates v_{k+1} = alpha_k v_k + beta_k.
  std::vector<double> alpha(n_samples), beta(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double a = static_cast<double>(k) * h;
    const double b = a + h;
    alpha[k] = std::exp(-gauss(decay, a, b));
    beta[k] = gauss([&](double s) { return std::exp(-gauss(decay, s, b)) * source(s); }, a, b);
  }
  double transfer = 1.0;
  double forced = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    transfer *= alpha[k];
    forced = alpha[k] * forced + beta[k];
  }
  const double closure = 1.0 - transfer;
  if (!(closure > 0)) {
    throw SolverError(ErrorCode::InvalidArgument, "periodic closure constant degenerates");
  }
  std::vector<double> v(n_samples), dv(n_samples);
  v[0] = forced / closure;
  for (std::size_t k = 0; k + 1 < n_samples; ++k) v[k + 1] = alpha[k] * v[k] + beta[k];
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) * h;
    dv[k] = -decay(t) * v[k] + source(t);
  }
  return PeriodicSignal(period, 1, std::move(v), std::move(dv));
}

PeriodicSignal solve_periodic_first_order(const PeriodicSignal& decay,
                                          const PeriodicSignal& source) {
  if (decay.period() != source.period()) {
    throw SolverError(ErrorCode::InvalidArgument, "decay and source must share the period");
  }
  for (double v : decay.samples()) {
    if (!(v > 0)) throw SolverError(ErrorCode::InvalidArgument, "decay coefficient must be positive");
  }
  return solve_periodic_first_order(
      decay.period(), decay.size(), [&](double t) { return decay.eval(t); },
      [&](double t) { return source.eval(t); });
}

}  // namespace bvpcont
