#include "bvpcont/continuation.hpp"

#include <cmath>
#include <string>

#include "bvpcont/errors.hpp"

namespace bvpcont {
namespace {

constexpr int kMaxHalvings = 6;

std::optional<SolveReport> try_solve(const OperatorFamily& op, double c, const GridFn& start,
                                     const SolverOptions& opts) {
  try {
    SolveReport rep = solve_fixed_point(op, c, start, opts);
    if (rep.converged) return rep;
  } catch (const SolverError&) {
  }
  return std::nullopt;
}

BranchPoint make_point(double c, SolveReport rep, const Functional& phi) {
  BranchPoint p;
  p.c = c;
  p.phi = phi(c, rep.solution);
  p.residual = rep.residual;
  p.state = std::move(rep.solution);
  return p;
}

int sign_of(double v) { return std::abs(v) <= kPhiZeroTol ? 0 : (v > 0 ? 1 : -1); }

PhiRoot as_root(const BranchPoint& p) { return PhiRoot{p.c, p.state, p.phi, p.residual}; }

PhiRoot bisect(const BranchPoint& left, const BranchPoint& right, const OperatorFamily& op,
               const Functional& phi, double tol_c, const SolverOptions& opts) {
  BranchPoint lo = left;
  BranchPoint hi = right;
  const int lo_sign = sign_of(lo.phi);
  BranchPoint best = std::abs(lo.phi) < std::abs(hi.phi) ? lo : hi;
  while (std::abs(hi.c - lo.c) > tol_c) {
    const double mid = 0.5 * (lo.c + hi.c);
    if (mid == lo.c || mid == hi.c) break;
    auto rep = try_solve(op, mid, lo.state, opts);
    if (!rep) rep = try_solve(op, mid, hi.state, opts);
    if (!rep) {
      throw SolverError(ErrorCode::UnresolvedBranch,
                        "fixed point solve failed during root refinement at c = " +
                            std::to_string(mid));
    }
    BranchPoint m = make_point(mid, std::move(*rep), phi);
    if (std::abs(m.phi) < std::abs(best.phi)) best = m;
    const int s = sign_of(m.phi);
    if (s == 0) break;
    if (s == lo_sign) {
      lo = std::move(m);
    } else {
      hi = std::move(m);
    }
  }
  return as_root(best);
}

}  // namespace

double Branch::max_state_jump() const {
  double m = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    m = std::max(m, sup_distance(points[i - 1].state, points[i].state));
  }
  return m;
}

Branch trace_branch(const OperatorFamily& op, const Functional& phi, double c_start,
                    double c_end, int steps, const SolverOptions& opts,
                    std::optional<GridFn> start) {
  if (steps < 2) throw SolverError(ErrorCode::InvalidArgument, "trace_branch needs steps >= 2");
  if (c_start == c_end) throw SolverError(ErrorCode::InvalidArgument, "empty parameter range");
  Branch branch;
  branch.c_start = c_start;
  branch.c_end = c_end;

  GridFn state = start ? std::move(*start) : op.zero_state();
  auto first = try_solve(op, c_start, state, opts);
  if (!first) {
    throw SolverError(ErrorCode::UnresolvedBranch,
                      "no fixed point reached at the range start c = " + std::to_string(c_start));
  }
  branch.points.push_back(make_point(c_start, std::move(*first), phi));

  const double spacing = (c_end - c_start) / static_cast<double>(steps - 1);
  for (int k = 1; k < steps; ++k) {
    const double target = k == steps - 1 ? c_end : c_start + k * spacing;
    double h = spacing;
    int halvings = 0;
    while (true) {
      const BranchPoint& prev = branch.points.back();
      const double remaining = target - prev.c;
      const bool last = std::abs(remaining) <= std::abs(h) * (1 + 1e-12);
      const double c_try = last ? target : prev.c + h;
      auto rep = try_solve(op, c_try, prev.state, opts);
      if (rep) {
        branch.points.push_back(make_point(c_try, std::move(*rep), phi));
        if (last) break;
        continue;
      }
      if (++halvings > kMaxHalvings) {
        throw SolverError(ErrorCode::UnresolvedBranch,
                          "fixed point solve failed at minimum step near c = " +
                              std::to_string(c_try));
      }
      h *= 0.5;
    }
  }
  return branch;
}

std::vector<PhiRoot> find_phi_roots(const Branch& branch, const OperatorFamily& op,
                                    const Functional& phi, double tol_c,
                                    const SolverOptions& opts) {
  std::vector<PhiRoot> roots;
  const auto& pts = branch.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int si = sign_of(pts[i].phi);
    if (si == 0) {
      roots.push_back(as_root(pts[i]));
      continue;
    }
    if (i + 1 < pts.size()) {
      const int sj = sign_of(pts[i + 1].phi);
      if (sj != 0 && sj != si) roots.push_back(bisect(pts[i], pts[i + 1], op, phi, tol_c, opts));
    }
  }
  return roots;
}

PhiRoot find_phi_root(const Branch& branch, const OperatorFamily& op, const Functional& phi,
                      double tol_c, const SolverOptions& opts) {
  const auto& pts = branch.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int si = sign_of(pts[i].phi);
    if (si == 0) return as_root(pts[i]);
    if (i + 1 < pts.size()) {
      const int sj = sign_of(pts[i + 1].phi);
      if (sj != 0 && sj != si) return bisect(pts[i], pts[i + 1], op, phi, tol_c, opts);
    }
  }
  throw SolverError(ErrorCode::NoSignChange,
                    "functional keeps one sign over c in [" + std::to_string(branch.c_start) +
                        ", " + std::to_string(branch.c_end) + "]");
}

}  // namespace bvpcont
