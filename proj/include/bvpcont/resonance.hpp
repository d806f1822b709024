#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bvpcont/continuation.hpp"
#include "bvpcont/fixed_point.hpp"
#include "bvpcont/grid.hpp"
#include "bvpcont/maps.hpp"

namespace bvpcont {

enum class NonlinearityClass { Periodic, LandesmanLazer, GenericBounded };

/// u'' + a u' + g(u) = p0 + s, omega-periodic.
struct ResonantProblem {
  double omega = 2.0 * 3.14159265358979323846;
  double a = 0.0;
  std::size_t dim = 1;
  VectorMap g;
  NonlinearityClass g_class = NonlinearityClass::GenericBounded;
  /// Periods sigma_j of g in each coordinate (Periodic class).
  std::vector<double> periods;
  /// Declared limits g(-inf), g(+inf) (LandesmanLazer class, scalar).
  double g_minus = 0.0;
  double g_plus = 0.0;
  /// Forcing; its sample mean is removed before use.
  PeriodicSignal p0 = PeriodicSignal::constant(2.0 * 3.14159265358979323846, 400, 0.0);
  std::optional<double> g_sup;
  std::size_t n_nodes = 401;

  UniformGrid grid() const { return UniformGrid(0.0, omega, n_nodes); }
};

/// sup|g| from the declaration, or sampled over one period cell (Periodic)
/// or over [-100, 100] in each coordinate.
double effective_g_sup(const ResonantProblem& prob);

/// k (2 ||g|| + ||p0||) with k the sampled norm of the damped Dirichlet
/// inverse applied to the constant 1.
double resonance_radius(const ResonantProblem& prob);

/// (c, w) -> solve_two_point_damped(p0 - g(c + w) + mean g(c + w), a).
OperatorFamily resonance_operator(const ResonantProblem& prob);

/// Rectangle-rule mean of g(c + w) over [0, omega), per component.
std::vector<double> mean_nonlinearity(std::span<const double> c, const GridFn& w,
                                      const ResonantProblem& prob);
double mean_nonlinearity(double c, const GridFn& w, const ResonantProblem& prob);

struct RangeSample {
  double c = 0.0;
  double value = 0.0;
};

struct IntervalEstimate {
  double lo = 0.0;
  double hi = 0.0;
  double tol = 0.0;
  std::vector<RangeSample> samples;
  /// Set when the window was user supplied for a generic g, so the
  /// endpoints are bounds over that window only.
  bool window_relative = false;
};

struct RangeOptions {
  std::optional<std::pair<double, double>> window;
  int steps = 64;
  int refine_rounds = 3;
  SolverOptions solver;
};

/// Window used by compute_range when none is supplied.
std::pair<double, double> auto_window(const ResonantProblem& prob);

/// Range of c -> mean g(c + v_c) along the branch over the window, with the
/// extremal samples refined by local bisection.
IntervalEstimate compute_range(const ResonantProblem& prob, const RangeOptions& opts = {},
                               Branch* branch_out = nullptr);

struct PeriodicSolution {
  double c = 0.0;
  GridFn u;
  double equation_residual = 0.0;
  /// |u(0) - u(omega)| + |u'(0) - u'(omega)|, derivatives from ghost nodes
  /// eliminated with the equation at each end.
  double closure = 0.0;
  /// |mean g(u) - s|.
  double mean_defect = 0.0;
};

/// Residual and closure of a candidate periodic solution u on the problem grid.
PeriodicSolution verify_periodic(const ResonantProblem& prob, double s, double c, GridFn u);

/// Periodic solution for the given s. Throws SolverError(NoSignChange) when
/// s - mean g(c + v_c) keeps one sign over the window.
PeriodicSolution solve_for_s(const ResonantProblem& prob, double s,
                             const RangeOptions& opts = {}, Branch* branch_out = nullptr);

struct WirtingerCheck {
  bool holds = false;
  double sup_quotient = 0.0;
  double threshold = 0.0;
};

/// Samples pairs in [-radius, radius]^dim (fixed seed) and compares the
/// largest monotonicity quotient with (2 pi / omega)^2.
WirtingerCheck check_wirtinger(const ResonantProblem& prob, double radius,
                               std::size_t n_samples = 10000);

struct WxResult {
  PeriodicSignal w = PeriodicSignal::constant(1.0, 1, 0.0);
  std::vector<double> C;
  double residual = 0.0;
  double mean_defect = 0.0;
  int iterations = 0;
  bool wirtinger_holds = true;
};

struct WxOptions {
  std::size_t n_samples = 256;
  double tol = 1e-9;
  int max_iter = 50;
  /// Starting node values (node-major, n_samples * dim); zero when empty.
  std::vector<double> start;
};

/// Zero-mean periodic w with w'' + a w' + g(x + w) - p0 = C, by Newton on a
/// fourth-order wraparound discretization with C as extra unknowns.
///
/// Throws SolverError(NoConvergence) with the best residual on failure.
WxResult solve_wx(const ResonantProblem& prob, std::span<const double> x,
                  const WxOptions& opts = {});

struct RangeCloud {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> image;
  std::vector<bool> failed;
  /// Largest image distance between grid neighbours.
  double max_neighbor_jump = 0.0;
  bool wirtinger_holds = true;
};

/// Images mean g(x + w_x) over an m x m grid of x; each x point is
/// independent and they are spread over `jobs` threads.
RangeCloud sample_range_nd(const ResonantProblem& prob, const Rectangle& box, int resolution,
                           const WxOptions& opts = {}, int jobs = 1);

/// Hausdorff distance between finite point sets (Euclidean).
double hausdorff_distance(const std::vector<std::vector<double>>& A,
                          const std::vector<std::vector<double>>& B);

struct ContinuityRow {
  double amplitude = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double distance = 0.0;
};

/// Range for p0 + amplitude (perturbation - mean) at each amplitude, and its
/// Hausdorff distance to the unperturbed range.
std::vector<ContinuityRow> continuity_experiment(const ResonantProblem& prob,
                                                 const PeriodicSignal& perturbation,
                                                 const std::vector<double>& amplitudes,
                                                 const RangeOptions& opts = {}, int jobs = 1);

struct NonintersectionResult {
  bool holds = false;
  double min_gap = 0.0;
};

/// For every pair c_i < c_j on the branch, min over nodes of u_j - u_i with
/// u = c + v, which must stay positive.
NonintersectionResult nonintersection_check(const Branch& branch);

struct SolutionGroup {
  PeriodicSolution representative;
  int members = 0;
};

/// solve_for_s over the windows [0, sigma] + j sigma / 4, j = 0..7, grouping
/// solutions that differ by a multiple of sigma (within 1e-4).
std::vector<SolutionGroup> multistart_geometric(const ResonantProblem& prob, double s,
                                                const RangeOptions& opts = {});

/// Compares the declared limits with g(-1e6), g(1e6); true when both agree
/// within 1e-3.
bool check_landesman_lazer_limits(const ResonantProblem& prob);

}  // namespace bvpcont
