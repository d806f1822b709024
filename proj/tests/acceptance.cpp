// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bvpcont/chemostat.hpp"
#include "bvpcont/continuation.hpp"
#include "bvpcont/errors.hpp"
#include "bvpcont/linear_solvers.hpp"
#include "bvpcont/nonlocal.hpp"
#include "bvpcont/resonance.hpp"

using namespace bvpcont;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double sup_error(const GridFn& v, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) e = std::max(e, std::abs(v(k) - exact(v.grid().node(k))));
  return e;
}

double dirichlet_error(std::size_t n) {
  const UniformGrid grid = UniformGrid::symmetric(1.0, n);
  const GridFn v = solve_dirichlet(GridFn::sample(grid, [](double t) { return std::sin(kPi * t); }));
  return sup_error(v, [](double t) { return -std::sin(kPi * t) / (kPi * kPi); });
}

// v'' + v' = sin(k t) on [0, 1] with v(0) = v(1) = 0.
double damped_error(std::size_t n) {
  const double k = 2 * kPi;
  const double B = -1.0 / (k * (k * k + 1));
  const double A = k * B;
  const UniformGrid grid(0.0, 1.0, n);
  const GridFn v = solve_two_point_damped(GridFn::sample(grid, [k](double t) { return std::sin(k * t); }), 1.0);
  return sup_error(v, [=](double t) { return A * std::sin(k * t) + B * std::cos(k * t) - B; });
}

Outcome linear_solvers() {
  Outcome o;
  const double ed = dirichlet_error(401);
  const double order_d = std::log2(dirichlet_error(101) / dirichlet_error(201));
  const double ep = damped_error(401);
  const double order_p = std::log2(damped_error(101) / damped_error(201));
  const GridFn v = solve_two_point_damped(
      GridFn::sample(UniformGrid(0.0, 1.0, 401), [](double t) { return std::cos(2 * kPi * t); }), 1.0);
  const EndpointSlopes sl = endpoint_slopes(v);
  const double jump = std::abs(sl.left - sl.right);
  o.require(ed <= 1e-4, "dirichlet sup-error");
  o.require(ep <= 1e-4, "damped sup-error");
  o.require(order_d >= 1.9 && order_p >= 1.9, "convergence order");
  o.require(jump <= 1e-6, "derivative closure");
  o.detail << "dirichlet err " << ed << " order " << order_d << "; damped err " << ep << " order " << order_p
           << "; |v'(0)-v'(w)| " << jump;
  return o;
}

NonlocalProblem scalar_problem(std::function<double(double, double)> f, std::function<double(double)> g) {
  NonlocalProblem p;
  p.f = scalar_field(std::move(f));
  p.g = scalar_map(std::move(g));
  return p;
}

Outcome nonlocal_scalar() {
  Outcome o;
  NonlocalProblem lin = scalar_problem([](double, double) { return 2.0; }, [](double u) { return u / 2; });
  lin.growth = GrowthClass::BoundedSublinear;
  const auto s1 = solve_nonlocal(lin);
  o.require(s1.size() == 1 && std::abs(s1[0].c[0] + 1.0) <= 1e-6, "linear case c = -1");

  NonlocalProblem cubic = scalar_problem([](double, double) { return 0.0; }, [](double u) { return u * u * u; });
  cubic.growth = GrowthClass::Superlinear;
  const auto s3 = solve_nonlocal(cubic);
  bool cubic_ok = s3.size() == 3;
  const double expected[] = {-1.0, 0.0, 1.0};
  for (std::size_t i = 0; cubic_ok && i < 3; ++i) cubic_ok = std::abs(s3[i].c[0] - expected[i]) <= 1e-6;
  o.require(cubic_ok, "cubic roots {-1, 0, 1}");

  NonlocalProblem shift = scalar_problem(
      [](double t, double u) { return 0.2 * std::sin(u) + 0.1 * std::cos(t); },
      [](double u) { return u + std::sin(std::cbrt(u)); });
  shift.f_sup = 0.3;
  shift.growth = GrowthClass::UserBracket;
  shift.bracket = {-std::pow(kPi / 2, 3), std::pow(5 * kPi / 2, 3)};
  NonlocalSolveOptions opts;
  opts.steps = 128;
  const auto sm = solve_nonlocal(shift, opts);
  double worst = 0.0;
  for (const auto& s : sm) worst = std::max({worst, s.equation_residual, s.boundary_residual});
  o.require(sm.size() >= 3 && worst <= 1e-6, "u + sin(cbrt u) multiplicity");
  o.detail << "linear c " << s1[0].c[0] << "; cubic " << s3.size() << " roots; shifted " << sm.size()
           << " solutions, worst residual " << worst;
  return o;
}

Outcome nonlocal_planar() {
  Outcome o;
  const Rectangle sq{-0.5, 0.5, -0.5, 0.5};
  const int id = winding_number([](double x, double y) { return std::array{x, y}; }, sq);
  const int neg = winding_number([](double x, double y) { return std::array{-x, -y}; }, sq);
  const int dbl = winding_number([](double x, double y) { return std::array{x * x - y * y, 2 * x * y}; }, sq);
  o.require(id == 1 && neg == 1 && dbl == 2, "winding numbers");

  NonlocalProblem p;
  p.dim = 2;
  p.f = [](double, std::span<const double>, std::span<double> out) {
    out[0] = 2.0;
    out[1] = 0.0;
  };
  p.g = [](std::span<const double> u, std::span<double> out) {
    out[0] = u[0] / 2;
    out[1] = u[1] / 2;
  };
  p.growth = GrowthClass::PlanarDegree;
  p.region = {-3, 3, -3, 3};
  p.n_nodes = 201;
  const PlanarSolution sol = solve_nonlocal_planar(p);
  const auto& c = sol.solution.c;
  o.require(std::abs(c[0] + 1) <= 1e-6 && std::abs(c[1]) <= 1e-6, "planar c = (-1, 0)");
  o.detail << "winding " << id << ", " << neg << ", " << dbl << "; planar c (" << c[0] << ", " << c[1] << ")";
  return o;
}

ResonantProblem pendulum(double omega, double a, std::function<double(double)> p0) {
  ResonantProblem p;
  p.omega = omega;
  p.a = a;
  p.g = scalar_map([](double u) { return std::sin(u); });
  p.g_class = NonlinearityClass::Periodic;
  p.periods = {2 * kPi};
  p.p0 = PeriodicSignal::sample(omega, 400, std::move(p0));
  return p;
}

Outcome resonance_range() {
  Outcome o;
  const auto zero = [](double) { return 0.0; };
  for (double a : {0.0, 0.5}) {
    const IntervalEstimate r = compute_range(pendulum(2 * kPi, a, zero));
    o.require(std::abs(r.lo + 1) <= 1e-3 && std::abs(r.hi - 1) <= 1e-3, "p0 = 0 range [-1, 1]");
    o.detail << "a=" << a << " [" << r.lo << ", " << r.hi << "]; ";
  }
  struct Forced {
    double omega, a, amp, freq;
  };
  const Forced cases[] = {{kPi, 0.0, 0.5, 2.0}, {kPi, 0.0, 0.3, 2.0}, {2 * kPi, 0.3, 0.2, 1.0}, {2 * kPi, 0.5, 0.4, 1.0}};
  for (const auto& fc : cases) {
    const IntervalEstimate r =
        compute_range(pendulum(fc.omega, fc.a, [fc](double t) { return fc.amp * std::cos(fc.freq * t); }));
    o.require(r.lo >= -1 - 1e-9 && r.hi <= 1 + 1e-9, "range inside [-1, 1]");
    if (fc.a == 0.0) o.require(r.lo <= 1e-6 && r.hi >= -1e-6, "a = 0 range contains 0");
    o.detail << "forced [" << r.lo << ", " << r.hi << "] ";
  }
  return o;
}

ResonantProblem arctan_problem() {
  ResonantProblem p;
  p.omega = 2 * kPi;
  p.a = 0.5;
  p.g = scalar_map([](double u) { return 2 / kPi * std::atan(u); });
  p.g_class = NonlinearityClass::LandesmanLazer;
  p.g_minus = -1;
  p.g_plus = 1;
  p.p0 = PeriodicSignal::sample(p.omega, 400, [](double t) { return 0.2 * std::cos(t); });
  return p;
}

Outcome landesman_lazer() {
  Outcome o;
  const ResonantProblem p = arctan_problem();
  const PeriodicSolution inside = solve_for_s(p, 0.5);
  o.require(inside.equation_residual <= 1e-6 && inside.closure <= 1e-6, "s = 0.5 solved");
  std::string report;
  try {
    solve_for_s(p, 1.5);
    o.require(false, "s = 1.5 must fail");
  } catch (const SolverError& e) {
    report = e.what();
    o.require(e.code() == ErrorCode::NoSignChange, "NoSignChange code");
    o.require(report.find("necessary") != std::string::npos, "necessary-condition report");
  }
  o.detail << "s=0.5 residual " << inside.equation_residual << " closure " << inside.closure << "; s=1.5: "
           << report;
  return o;
}

Outcome branch_structure() {
  Outcome o;
  const ResonantProblem p = pendulum(2 * kPi, 0.3, [](double t) { return 0.2 * std::cos(t); });
  const OperatorFamily op = resonance_operator(p);
  const Functional phi = [&p](double c, const GridFn& w) { return mean_nonlinearity(c, w, p); };
  Branch b = trace_branch(op, phi, 0.0, 2 * kPi, 50);
  const NonintersectionResult ok = nonintersection_check(b);
  std::swap(b.points[10].state, b.points[30].state);
  const NonintersectionResult bad = nonintersection_check(b);
  o.require(b.points.size() >= 50, "50-point branch");
  o.require(ok.holds && ok.min_gap > 0, "non-intersection");
  o.require(!bad.holds, "corrupted branch rejected");
  o.detail << b.points.size() << " points, min gap " << ok.min_gap << "; corrupted min gap " << bad.min_gap;
  return o;
}

double sup_between(const PeriodicSignal& a, const PeriodicSignal& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.samples().size(); ++i) e = std::max(e, std::abs(a.samples()[i] - b.samples()[i]));
  return e;
}

Outcome wx() {
  Outcome o;
  ResonantProblem lin;
  lin.omega = 2.0;
  lin.g = scalar_map([](double) { return 0.0; });
  lin.p0 = PeriodicSignal::sample(2.0, 400, [](double t) { return std::cos(kPi * t); });
  const double x0 = 0.4;
  const WxResult f = solve_wx(lin, std::span(&x0, 1));
  double err = std::abs(f.C[0]);
  const double scale = (2.0 / (2 * kPi)) * (2.0 / (2 * kPi));
  for (std::size_t k = 0; k < f.w.size(); ++k) {
    err = std::max(err, std::abs(f.w.sample_at(k) + scale * std::cos(kPi * f.w.node(k))));
  }
  o.require(err <= 1e-7, "Fourier oracle");
  double worst_mean = f.mean_defect;

  const ResonantProblem pend = pendulum(kPi, 0.0, [](double t) { return 0.3 * std::cos(2 * t); });
  const WirtingerCheck wc = check_wirtinger(pend, 10.0);
  double worst_gap = 0.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double x : {0.0, 0.7, 2.5}) {
    const WxResult a = solve_wx(pend, std::span(&x, 1));
    WxOptions opts;
    opts.start.resize(opts.n_samples);
    for (double& v : opts.start) v = dist(rng);
    const WxResult b = solve_wx(pend, std::span(&x, 1), opts);
    worst_gap = std::max(worst_gap, sup_between(a.w, b.w));
    worst_mean = std::max({worst_mean, a.mean_defect, b.mean_defect});
  }
  o.require(wc.holds, "Wirtinger holds for the pendulum at omega = pi");
  o.require(worst_gap <= 1e-7, "independent starts agree");
  o.require(worst_mean <= 1e-10, "zero mean");
  o.detail << "oracle err " << err << "; start gap " << worst_gap << "; worst |mean| " << worst_mean;
  return o;
}

Outcome continuity() {
  Outcome o;
  const ResonantProblem p = pendulum(2 * kPi, 0.5, [](double) { return 0.0; });
  const PeriodicSignal pert = PeriodicSignal::sample(p.omega, 400, [](double t) { return std::cos(t); });
  std::vector<double> amps;
  for (int k = 0; k <= 6; ++k) amps.push_back(std::ldexp(1.0, -k));
  RangeOptions opts;
  opts.steps = 32;
  const auto rows = continuity_experiment(p, pert, amps, opts);
  o.require(rows.size() == 7 && rows.back().distance <= 1e-2, "final distance");

  std::vector<std::vector<double>> unit, twice;
  for (int i = 0; i <= 100; ++i) {
    unit.push_back({i / 100.0});
    twice.push_back({i / 50.0});
  }
  const bool h1 = hausdorff_distance(unit, unit) == 0.0;
  const bool h2 = hausdorff_distance({{0.0}}, {{0.0}, {1.0}}) == 1.0;
  const bool h3 = hausdorff_distance(unit, twice) == 1.0;
  o.require(h1 && h2 && h3, "Hausdorff examples");
  o.detail << "distances";
  for (const auto& r : rows) o.detail << " " << r.distance;
  return o;
}

ChemostatModel chemostat(double d_mean, double d_amp, double tau, std::size_t steps = 2048) {
  ChemostatModel m;
  m.tau = tau;
  m.D = PeriodicSignal::sample(1.0, steps, [=](double t) { return d_mean + d_amp * std::sin(2 * kPi * t); });
  m.s0 = PeriodicSignal::constant(1.0, steps, 1.0);
  m.mu = monod(1, 1);
  m.steps_per_period = steps;
  return m;
}

Outcome chemostat_orbits() {
  Outcome o;
  const auto constant = find_periodic_orbit(chemostat(0.25, 0.0, 0.5));
  const auto* orbit = std::get_if<PeriodicOrbit>(&constant);
  o.require(orbit != nullptr, "constant model orbit");
  if (orbit) {
    double s_err = 0.0;
    for (double v : orbit->phi.values()) s_err = std::max(s_err, std::abs(v - 1.0 / 3));
    o.require(s_err <= 1e-5 && std::abs(orbit->x0 - 2.0 / 3) <= 1e-5, "(1/3, 2/3)");
    o.require(orbit->poincare_residual <= 1e-7, "constant Poincare residual");
    o.detail << "constant x0 " << orbit->x0 << " residual " << orbit->poincare_residual << "; ";
  }
  const auto washout = find_periodic_orbit(chemostat(0.6, 0.0, 0.5));
  const auto* cert = std::get_if<NonexistenceCertificate>(&washout);
  o.require(cert != nullptr && std::abs(cert->margin + 0.1) <= 1e-9, "certificate margin -0.1");
  if (cert) o.detail << "margin " << cert->margin << "; ";

  const auto forced = find_periodic_orbit(chemostat(0.25, 0.125, 0.3));
  const auto fine = find_periodic_orbit(chemostat(0.25, 0.125, 0.3, 4096));
  const auto* fo = std::get_if<PeriodicOrbit>(&forced);
  const auto* ff = std::get_if<PeriodicOrbit>(&fine);
  o.require(fo && fo->verified(), "periodic-D orbit verified");
  if (fo && ff) {
    double change = std::abs(fo->x0 - ff->x0);
    for (int i = 0; i <= 20; ++i) {
      const double t = -0.3 + 0.3 * i / 20.0;
      change = std::max(change, std::abs(fo->phi.eval(t) - ff->phi.eval(t)));
    }
    o.require(change <= 1e-6, "step halving");
    o.detail << "forced x0 " << fo->x0 << " residual " << fo->poincare_residual << " log defect "
             << fo->log_identity_defect << "; halving change " << change;
  }
  return o;
}

Outcome miranda() {
  Outcome o;
  struct Case {
    PlanarMap phi;
    double t, x;
  };
  const Case cases[] = {
      {[](double t, double x) { return std::array{2 * t - 1, 2 * x - 1}; }, 0.5, 0.5},
      {[](double t, double x) { return std::array{t - x * x - 0.1, x - 0.25}; }, 0.1625, 0.25},
      {[](double t, double x) { return std::array{t - 0.3, x - t}; }, 0.3, 0.3},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const MirandaRoot r = poincare_miranda_solve(c.phi, 1.0);
    worst = std::max({worst, std::abs(r.t - c.t), std::abs(r.x - c.x)});
  }
  o.require(worst <= 1e-8, "roots");
  o.detail << "worst component error " << worst;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "bvpcont_acceptance";
  const fs::path configs = fs::path(BVPCONT_SOURCE_DIR) / "tools" / "configs";
  struct Run {
    const char* config;
    const char* command;
  };
  const Run runs[] = {{"nonlocal_cubic.toml", "solve nonlocal"},
                      {"pendulum_range.toml", "range resonance"},
                      {"chemostat_periodic.toml", "solve chemostat"}};
  int idx = 0;
  for (const auto& r : runs) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (std::to_string(idx) + "_" + std::to_string(rep));
      fs::remove_all(out);
      fs::create_directories(out);
      const std::string cmd = std::string("\"") + BVPCONT_CLI_PATH + "\" --config \"" +
                              (configs / r.config).string() + "\" --out \"" + out.string() + "\" " + r.command +
                              " > /dev/null";
      const int status = std::system(cmd.c_str());
      o.require(status == 0, std::string(r.command) + " exit status");
      outputs[rep] = slurp(out / "result.json");
    }
    o.require(!outputs[0].empty() && outputs[0] == outputs[1], std::string(r.config) + " byte-identical");
    o.detail << r.config << " " << outputs[0].size() << " bytes; ";
    ++idx;
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Outcome()> run;
  };
  const Entry criteria[] = {
      {"linear solvers", linear_solvers},
      {"nonlocal scalar", nonlocal_scalar},
      {"nonlocal planar", nonlocal_planar},
      {"resonance range", resonance_range},
      {"Landesman-Lazer", landesman_lazer},
      {"branch structure", branch_structure},
      {"w_x", wx},
      {"continuity", continuity},
      {"chemostat", chemostat_orbits},
      {"Poincare-Miranda", miranda},
      {"determinism", determinism},
  };
  int failures = 0;
  int index = 1;
  for (const auto& c : criteria) {
    bool pass = false;
    std::string detail;
    try {
      Outcome o = c.run();
      pass = o.pass;
      detail = o.detail.str();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!pass) ++failures;
    std::printf("%s %2d. %s: %s\n", pass ? "PASS" : "FAIL", index++, c.name, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - 1 - failures, index - 1);
  return failures == 0 ? 0 : 1;
}
