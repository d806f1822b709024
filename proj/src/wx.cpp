#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>

#include "bvpcont/errors.hpp"
#include "bvpcont/resonance.hpp"

namespace bvpcont {
namespace {

// Fourth-order periodic stencils on offsets -2..2.
constexpr double kSecond[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
constexpr double kFirst[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};

struct WxSystem {
  const ResonantProblem& prob;
  std::span<const double> x;
  std::size_t n;
  std::size_t m;
  double h;
  std::vector<double> forcing;

  Eigen::Index size() const { return static_cast<Eigen::Index>(n * m + m); }
  std::size_t wrap(std::size_t k, int off) const {
    return static_cast<std::size_t>((static_cast<long>(k) + off + static_cast<long>(n)) %
                                    static_cast<long>(n));
  }

  void g_at(const Eigen::VectorXd& z, std::size_t k, std::vector<double>& u,
            std::vector<double>& out) const {
    for (std::size_t d = 0; d < m; ++d) u[d] = x[d] + z[static_cast<Eigen::Index>(k * m + d)];
    prob.g(u, out);
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& z) const {
    Eigen::VectorXd F(size());
    std::vector<double> u(m), gu(m);
    for (std::size_t k = 0; k < n; ++k) {
      g_at(z, k, u, gu);
      for (std::size_t d = 0; d < m; ++d) {
        double lin = 0.0;
        for (int o = -2; o <= 2; ++o) {
          const double w = z[static_cast<Eigen::Index>(wrap(k, o) * m + d)];
          lin += (kSecond[o + 2] / (h * h) + prob.a * kFirst[o + 2] / h) * w;
        }
        F[static_cast<Eigen::Index>(k * m + d)] =
            lin + gu[d] - forcing[k * m + d] - z[static_cast<Eigen::Index>(n * m + d)];
      }
    }
    for (std::size_t d = 0; d < m; ++d) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += z[static_cast<Eigen::Index>(k * m + d)];
      F[static_cast<Eigen::Index>(n * m + d)] = s / static_cast<double>(n);
    }
    return F;
  }

  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& z) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * m * (5 + m + 1) + n * m);
    std::vector<double> u(m), base(m), shifted(m);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t d = 0; d < m; ++d) {
        const auto row = static_cast<Eigen::Index>(k * m + d);
        for (int o = -2; o <= 2; ++o) {
          trip.emplace_back(row, static_cast<Eigen::Index>(wrap(k, o) * m + d),
                            kSecond[o + 2] / (h * h) + prob.a * kFirst[o + 2] / h);
        }
        trip.emplace_back(row, static_cast<Eigen::Index>(n * m + d), -1.0);
      }
      g_at(z, k, u, base);
      for (std::size_t e = 0; e < m; ++e) {
        const double step = 1e-7 * (1.0 + std::abs(u[e]));
        std::vector<double> up = u;
        up[e] += step;
        prob.g(up, shifted);
        for (std::size_t d = 0; d < m; ++d) {
          trip.emplace_back(static_cast<Eigen::Index>(k * m + d),
                            static_cast<Eigen::Index>(k * m + e), (shifted[d] - base[d]) / step);
        }
      }
    }
    for (std::size_t d = 0; d < m; ++d) {
      for (std::size_t k = 0; k < n; ++k) {
        trip.emplace_back(static_cast<Eigen::Index>(n * m + d),
                          static_cast<Eigen::Index>(k * m + d), 1.0 / static_cast<double>(n));
      }
    }
    Eigen::SparseMatrix<double> J(size(), size());
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }
};

double equation_norm(const Eigen::VectorXd& F, std::size_t rows) {
  return F.head(static_cast<Eigen::Index>(rows)).lpNorm<Eigen::Infinity>();
}

}  // namespace

WxResult solve_wx(const ResonantProblem& prob, std::span<const double> x, const WxOptions& opts) {
  const std::size_t m = prob.dim;
  const std::size_t n = opts.n_samples;
  if (x.size() != m) throw SolverError(ErrorCode::InvalidArgument, "x has the wrong dimension");
  if (n < 8) throw SolverError(ErrorCode::DegenerateGrid, "w_x needs at least 8 samples");
  const PeriodicSignal p0 = prob.p0.zero_mean();
  WxSystem sys{prob, x, n, m, prob.omega / static_cast<double>(n), std::vector<double>(n * m)};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t d = 0; d < m; ++d) {
      sys.forcing[k * m + d] = p0.eval(static_cast<double>(k) * sys.h, p0.dim() == 1 ? 0 : d);
    }
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(sys.size());
  if (!opts.start.empty()) {
    if (opts.start.size() != n * m) throw SolverError(ErrorCode::InvalidArgument, "start has the wrong size");
    for (std::size_t i = 0; i < n * m; ++i) z[static_cast<Eigen::Index>(i)] = opts.start[i];
  }

  double max_x = 0.0;
  for (double v : x) max_x = std::max(max_x, std::abs(v));
  WxResult out;
  out.wirtinger_holds = check_wirtinger(prob, max_x + 10.0).holds;

  Eigen::VectorXd F = sys.residual(z);
  double res = std::max(equation_norm(F, n * m), F.tail(static_cast<Eigen::Index>(m)).lpNorm<Eigen::Infinity>());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const double mean_res = F.tail(static_cast<Eigen::Index>(m)).lpNorm<Eigen::Infinity>();
    if (equation_norm(F, n * m) <= opts.tol && mean_res <= 1e-10) break;
    const Eigen::SparseMatrix<double> J = sys.jacobian(z);
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      throw SolverError(ErrorCode::SingularJacobian,
                        "w_x Jacobian factorization failed (residual " + std::to_string(res) + ")");
    }
    const Eigen::VectorXd delta = lu.solve(-F);
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 20; ++halving, step *= 0.5) {
      const Eigen::VectorXd trial = z + step * delta;
      const Eigen::VectorXd Ft = sys.residual(trial);
      const double r = Ft.lpNorm<Eigen::Infinity>();
      if (std::isfinite(r) && r < res) {
        z = trial;
        F = Ft;
        res = r;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  const double eq = equation_norm(F, n * m);
  const double mean_res = F.tail(static_cast<Eigen::Index>(m)).lpNorm<Eigen::Infinity>();
  if (!(eq <= opts.tol && mean_res <= 1e-10)) {
    throw SolverError(ErrorCode::NoConvergence,
                      "w_x Newton stopped with residual " + std::to_string(eq) + " after " +
                          std::to_string(it) + " iterations");
  }
  std::vector<double> w(n * m);
  for (std::size_t i = 0; i < n * m; ++i) w[i] = z[static_cast<Eigen::Index>(i)];
  out.w = PeriodicSignal(prob.omega, m, std::move(w));
  out.C.resize(m);
  for (std::size_t d = 0; d < m; ++d) out.C[d] = z[static_cast<Eigen::Index>(n * m + d)];
  out.residual = eq;
  out.mean_defect = mean_res;
  out.iterations = it;
  return out;
}

}  // namespace bvpcont
