#include <algorithm>
#include <cmath>
#include <limits>

#include "bvpcont/errors.hpp"
#include "bvpcont/resonance.hpp"
#include "parallel.hpp"

namespace bvpcont {

RangeCloud sample_range_nd(const ResonantProblem& prob, const Rectangle& box, int resolution,
                           const WxOptions& opts, int jobs) {
  if (prob.dim != 2) throw SolverError(ErrorCode::InvalidArgument, "sample_range_nd needs dim = 2");
  if (resolution < 2) throw SolverError(ErrorCode::InvalidArgument, "resolution must be >= 2");
  const auto m = static_cast<std::size_t>(resolution);
  RangeCloud cloud;
  cloud.x.resize(m * m);
  cloud.image.resize(m * m);
  cloud.failed.assign(m * m, false);
  const double radius = std::max({std::abs(box.x_lo), std::abs(box.x_hi), std::abs(box.y_lo),
                                  std::abs(box.y_hi)}) + 10.0;
  cloud.wirtinger_holds = check_wirtinger(prob, radius).holds;

  std::vector<char> failed(m * m, 0);
  detail::parallel_for(m * m, jobs, [&](std::size_t idx) {
    const std::size_t i = idx / m;
    const std::size_t j = idx % m;
    const std::vector<double> x{box.x_lo + (box.x_hi - box.x_lo) * static_cast<double>(i) / (m - 1),
                                box.y_lo + (box.y_hi - box.y_lo) * static_cast<double>(j) / (m - 1)};
    cloud.x[idx] = x;
    try {
      const WxResult wx = solve_wx(prob, x, opts);
      std::vector<double> u(2), gu(2), mean(2, 0.0);
      const std::size_t n = wx.w.size();
      for (std::size_t k = 0; k < n; ++k) {
        u[0] = x[0] + wx.w.sample_at(k, 0);
        u[1] = x[1] + wx.w.sample_at(k, 1);
        prob.g(u, gu);
        mean[0] += gu[0];
        mean[1] += gu[1];
      }
      mean[0] /= static_cast<double>(n);
      mean[1] /= static_cast<double>(n);
      cloud.image[idx] = mean;
    } catch (const SolverError&) {
      failed[idx] = 1;
      cloud.image[idx] = {std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN()};
    }
  });
  for (std::size_t idx = 0; idx < m * m; ++idx) cloud.failed[idx] = failed[idx] != 0;

  auto dist = [](const std::vector<double>& p, const std::vector<double>& q) {
    return std::hypot(p[0] - q[0], p[1] - q[1]);
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t idx = i * m + j;
      if (cloud.failed[idx]) continue;
      if (i + 1 < m && !cloud.failed[idx + m]) {
        cloud.max_neighbor_jump =
            std::max(cloud.max_neighbor_jump, dist(cloud.image[idx], cloud.image[idx + m]));
      }
      if (j + 1 < m && !cloud.failed[idx + 1]) {
        cloud.max_neighbor_jump =
            std::max(cloud.max_neighbor_jump, dist(cloud.image[idx], cloud.image[idx + 1]));
      }
    }
  }
  return cloud;
}

double hausdorff_distance(const std::vector<std::vector<double>>& A,
                          const std::vector<std::vector<double>>& B) {
  if (A.empty() || B.empty()) throw SolverError(ErrorCode::EmptyInput, "Hausdorff distance of an empty set");
  auto d = [](const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
    return std::sqrt(s);
  };
  auto excess = [&](const auto& X, const auto& Y) {
    double worst = 0.0;
    for (const auto& x : X) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& y : Y) nearest = std::min(nearest, d(x, y));
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(excess(A, B), excess(B, A));
}

std::vector<ContinuityRow> continuity_experiment(const ResonantProblem& prob,
                                                 const PeriodicSignal& perturbation,
                                                 const std::vector<double>& amplitudes,
                                                 const RangeOptions& opts, int jobs) {
  const IntervalEstimate base = compute_range(prob, opts);
  const PeriodicSignal p0 = prob.p0.zero_mean();
  const PeriodicSignal pert = perturbation.zero_mean();
  const std::size_t n = prob.n_nodes - 1;

  std::vector<ContinuityRow> rows(amplitudes.size());
  detail::parallel_for(amplitudes.size(), jobs, [&](std::size_t i) {
    const double amp = amplitudes[i];
    ResonantProblem perturbed = prob;
    perturbed.p0 = PeriodicSignal::sample(prob.omega, n, [&](double t) {
      return p0.eval(t) + amp * pert.eval(t);
    });
    const IntervalEstimate est = amp == 0.0 ? base : compute_range(perturbed, opts);
    rows[i] = ContinuityRow{amp, est.lo, est.hi,
                            std::max(std::abs(est.lo - base.lo), std::abs(est.hi - base.hi))};
  });
  return rows;
}

}  // namespace bvpcont
