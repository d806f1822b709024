#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bvpcont/continuation.hpp"
#include "bvpcont/errors.hpp"

namespace bvpcont {
namespace {

constexpr int kMaxSubdivision = 4;
constexpr double kMaxAngleStep = 0.5 * std::numbers::pi;

struct BoundaryLoop {
  Rectangle r;
  double wx;
  double wy;
  double perimeter() const { return 2 * (wx + wy); }

  // Counterclockwise position at arclength s in [0, perimeter].
  std::array<double, 2> at(double s) const {
    if (s <= wx) return {r.x_lo + s, r.y_lo};
    s -= wx;
    if (s <= wy) return {r.x_hi, r.y_lo + s};
    s -= wy;
    if (s <= wx) return {r.x_hi - s, r.y_hi};
    s -= wx;
    return {r.x_lo, r.y_hi - std::min(s, wy)};
  }
};

double angle_between(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
}

}  // namespace

int winding_number(const PlanarMap& field, const Rectangle& rect, int n_boundary) {
  if (n_boundary < 64) throw SolverError(ErrorCode::InvalidArgument, "n_boundary must be >= 64");
  if (!(rect.x_hi > rect.x_lo && rect.y_hi > rect.y_lo)) {
    throw SolverError(ErrorCode::InvalidArgument, "degenerate rectangle");
  }
  const BoundaryLoop loop{rect, rect.x_hi - rect.x_lo, rect.y_hi - rect.y_lo};
  const double ds = loop.perimeter() / n_boundary;

  std::vector<std::array<double, 2>> values(static_cast<std::size_t>(n_boundary) + 1);
  double scale = 0.0;
  for (int i = 0; i <= n_boundary; ++i) {
    const auto p = loop.at(i == n_boundary ? 0.0 : i * ds);
    values[static_cast<std::size_t>(i)] = field(p[0], p[1]);
    scale = std::max(scale, std::hypot(values[i][0], values[i][1]));
  }
  const double zero_tol = 1e-13 * scale;
  auto check = [&](const std::array<double, 2>& v, double s) {
    if (!(std::hypot(v[0], v[1]) > zero_tol)) {
      const auto p = loop.at(s);
      throw SolverError(ErrorCode::ZeroOnBoundary, "field vanishes near boundary point (" +
                                                       std::to_string(p[0]) + ", " +
                                                       std::to_string(p[1]) + ")");
    }
  };
  for (int i = 0; i <= n_boundary; ++i) check(values[static_cast<std::size_t>(i)], i * ds);

  // Angle swept between arclengths s0 and s1, subdividing large increments.
  auto segment = [&](auto&& self, double s0, double s1, const std::array<double, 2>& f0,
                     const std::array<double, 2>& f1, int depth) -> double {
    const double dtheta = angle_between(f0, f1);
    if (std::abs(dtheta) <= kMaxAngleStep) return dtheta;
    if (depth >= kMaxSubdivision) {
      throw SolverError(ErrorCode::UnresolvedAngleStep,
                        "angle increment " + std::to_string(dtheta) +
                            " unresolved after subdivision at arclength " + std::to_string(s0));
    }
    const double sm = 0.5 * (s0 + s1);
    const auto pm = loop.at(sm);
    const auto fm = field(pm[0], pm[1]);
    check(fm, sm);
    return self(self, s0, sm, f0, fm, depth + 1) + self(self, sm, s1, fm, f1, depth + 1);
  };

  double total = 0.0;
  for (int i = 0; i < n_boundary; ++i) {
    total += segment(segment, i * ds, (i + 1) * ds, values[static_cast<std::size_t>(i)],
                     values[static_cast<std::size_t>(i) + 1], 0);
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

MirandaRoot poincare_miranda_solve(const PlanarMap& phi, double M, int n_steps) {
  if (!(M > 0)) throw SolverError(ErrorCode::InvalidArgument, "M must be positive");
  if (n_steps < 2) throw SolverError(ErrorCode::InvalidArgument, "n_steps must be >= 2");
  constexpr int kSamples = 101;
  double sup_phi2 = 0.0;
  bool edges_hold = true;
  for (int i = 0; i < kSamples; ++i) {
    const double s = static_cast<double>(i) / (kSamples - 1);
    if (phi(0.0, s)[0] > 0 || phi(1.0, s)[0] < 0) edges_hold = false;
    if (phi(s, 0.0)[1] > 0 || phi(s, 1.0)[1] < 0) {
      throw SolverError(ErrorCode::SignConditionViolated,
                        "phi_2(t,0) <= 0 <= phi_2(t,1) fails at t = " + std::to_string(s));
    }
    for (int j = 0; j < kSamples; ++j) {
      const double x = static_cast<double>(j) / (kSamples - 1);
      sup_phi2 = std::max(sup_phi2, std::abs(phi(s, x)[1]));
    }
  }
  if (M < sup_phi2) {
    throw SolverError(ErrorCode::InvalidArgument,
                      "M = " + std::to_string(M) + " below sampled sup|phi_2| = " +
                          std::to_string(sup_phi2) + "; x - phi_2/M would leave [0,1]");
  }

  // Fixed point of f_t(x) = x - phi_2(t,x)/M, i.e. a zero of x - f_t(x).
  auto fixed_point = [&](double t) {
    auto gap = [&](double x) { return x - (x - phi(t, x)[1] / M); };
    double lo = 0.0;
    double hi = 1.0;
    if (gap(lo) == 0.0) return lo;
    if (gap(hi) == 0.0) return hi;
    while (hi - lo > 1e-14) {
      const double mid = 0.5 * (lo + hi);
      const double g = gap(mid);
      if (g == 0.0) return mid;
      (g < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto phi1 = [&](double t) {
    const double x = fixed_point(t);
    return std::pair{phi(t, x)[0], x};
  };

  // The phi_1 conditions are only needed where the traced curve meets the
  // edges t = 0 and t = 1.
  double t_prev = 0.0;
  auto [v_prev, x_prev] = phi1(0.0);
  const auto [v_end, x_end] = phi1(1.0);
  if (v_prev > 0 || v_end < 0) {
    throw SolverError(ErrorCode::SignConditionViolated,
                      "phi_1 has the wrong sign where the fixed-point curve meets t = 0 or t = 1");
  }
  if (v_prev == 0.0) return {0.0, x_prev, edges_hold};
  for (int k = 1; k < n_steps; ++k) {
    const double t = static_cast<double>(k) / (n_steps - 1);
    auto [v, x] = phi1(t);
    if (v == 0.0) return {t, x, edges_hold};
    if ((v > 0) != (v_prev > 0)) {
      double lo = t_prev;
      double hi = t;
      const bool lo_negative = v_prev < 0;
      while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        const double vm = phi1(mid).first;
        if (vm == 0.0) return {mid, fixed_point(mid), edges_hold};
        ((vm < 0) == lo_negative ? lo : hi) = mid;
      }
      const double t_star = 0.5 * (lo + hi);
      return {t_star, fixed_point(t_star), edges_hold};
    }
    t_prev = t;
    v_prev = v;
  }
  throw SolverError(ErrorCode::NoSignChange, "phi_1 keeps one sign along the traced fixed points");
}

}  // namespace bvpcont
