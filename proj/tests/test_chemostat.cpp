#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bvpcont/chemostat.hpp"
#include "bvpcont/errors.hpp"

using namespace bvpcont;

namespace {

constexpr double kPi = std::numbers::pi;

ChemostatModel model(double d_mean, double d_amp, double tau, std::size_t steps = 512,
                     std::function<double(double)> s0 = [](double) { return 1.0; }) {
  ChemostatModel m;
  m.tau = tau;
  m.D = PeriodicSignal::sample(1.0, steps, [=](double t) { return d_mean + d_amp * std::sin(2 * kPi * t); });
  m.s0 = PeriodicSignal::sample(1.0, steps, s0);
  m.mu = monod(1, 1);
  m.steps_per_period = steps;
  return m;
}

double vstar_at(const PeriodicSignal& v, double t) {
  const double w = std::fmod(t, v.period());
  return v.eval(w < 0 ? w + v.period() : w);
}

// Periodic solution of v' = D (s0 - v) through the integrating factor,
// quadratures by composite Simpson.
double vstar_oracle(const std::function<double(double)>& D, const std::function<double(double)>& s0, double t) {
  auto simpson = [](const std::function<double(double)>& f, double a, double b) {
    const int n = 2000;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4 : 2) * f(a + i * h);
    return acc * h / 3;
  };
  auto I = [&](double s) { return simpson(D, 0.0, s); };
  auto weighted = [&](double b) {
    return simpson([&](double s) { return std::exp(I(s)) * D(s) * s0(s); }, 0.0, b);
  };
  const double Iw = I(1.0);
  const double v0 = weighted(1.0) * std::exp(-Iw) / (1 - std::exp(-Iw));
  return std::exp(-I(t)) * (v0 + weighted(t));
}

HistoryFn constant_history(const ChemostatModel& m, double value) {
  return GridFn::constant(history_grid(m), 1, value);
}

double mean_trapezoid(const Trajectory& tr, const std::function<double(double, double)>& f, double t_end) {
  double acc = 0.0;
  for (std::size_t k = 1; k < tr.t.size() && tr.t[k] <= t_end + 1e-12; ++k) {
    acc += 0.5 * (f(tr.t[k - 1], tr.s[k - 1]) + f(tr.t[k], tr.s[k])) * (tr.t[k] - tr.t[k - 1]);
  }
  return acc / t_end;
}

}  // namespace

TEST(Monod, Values) {
  const auto mu = monod(2.0, 0.5);
  EXPECT_EQ(mu(0.0), 0.0);
  EXPECT_DOUBLE_EQ(mu(0.5), 1.0);
  EXPECT_DOUBLE_EQ(mu(1.5), 1.5);
}

TEST(Validate, RejectsMalformedModels) {
  EXPECT_NO_THROW(validate(model(0.25, 0.0, 0.5)));
  auto expect_invalid = [](const ChemostatModel& m) {
    try {
      validate(m);
      FAIL() << "expected a throw";
    } catch (const SolverError& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  };
  ChemostatModel m = model(0.25, 0.0, 1.0);
  expect_invalid(m);
  m = model(0.25, 0.0, 0.0);
  expect_invalid(m);
  m = model(0.25, 0.0, 0.5);
  m.gamma = 0.0;
  expect_invalid(m);
  expect_invalid(model(0.25, 0.5, 0.5));
  m = model(0.25, 0.0, 0.5);
  m.mu = [](double s) { return s + 0.1; };
  expect_invalid(m);
  m.mu = [](double s) { return s / (1 + s * s); };
  expect_invalid(m);
}

TEST(StepPlan, DelayIsAWholeNumberOfSteps) {
  for (double tau : {0.5, 0.3, 0.25}) {
    const StepPlan plan = step_plan(model(0.25, 0.0, tau, 2048));
    EXPECT_TRUE(plan.aligned);
    EXPECT_NEAR(plan.h * static_cast<double>(plan.history_intervals), tau, 1e-14);
    EXPECT_NEAR(plan.h * static_cast<double>(plan.steps), 1.0, 1e-14);
    EXPECT_GE(plan.steps, 2048u);
    EXPECT_LE(plan.steps, 2048u + 8);
  }
}

TEST(Vstar, ConstantCase) {
  const PeriodicSignal v = compute_vstar(model(0.25, 0.0, 0.5));
  for (double s : v.samples()) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Vstar, MatchesIntegratingFactorOracle) {
  const auto D = [](double t) { return 1 + 0.5 * std::sin(2 * kPi * t); };
  const auto s0 = [](double t) { return 1 + 0.3 * std::cos(2 * kPi * t); };
  const ChemostatModel m = model(1.0, 0.5, 0.5, 512, s0);
  const PeriodicSignal v = compute_vstar(m);
  for (double t : {0.0, 0.13, 0.5, 0.77}) EXPECT_NEAR(vstar_at(v, t), vstar_oracle(D, s0, t), 1e-8);
}

TEST(Vstar, IsPositive) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    const double amp = u(rng), sa = u(rng), ph = u(rng) * 2 * kPi;
    const ChemostatModel m =
        model(1.0, amp, 0.5, 256, [=](double t) { return 1 + sa * std::sin(2 * kPi * t + ph); });
    double lo = 1e300;
    for (double s : compute_vstar(m).samples()) lo = std::min(lo, s);
    EXPECT_GT(lo, 0.0);
  }
}

TEST(IntegrateDde, ZeroBiomassFollowsVstar) {
  const ChemostatModel m = model(0.25, 0.125, 0.3, 512, [](double t) { return 1 + 0.2 * std::cos(2 * kPi * t); });
  const PeriodicSignal v = compute_vstar(m);
  const Trajectory tr = integrate_dde(m, vstar_history(m, v), 0.0, 3.0);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    EXPECT_EQ(tr.x[k], 0.0);
    EXPECT_NEAR(tr.s[k], vstar_at(v, tr.t[k]), 1e-8);
  }
}

TEST(IntegrateDde, EquilibriumStaysPut) {
  const ChemostatModel m = model(0.25, 0.0, 0.5);
  const Trajectory tr = integrate_dde(m, constant_history(m, 1.0 / 3), 2.0 / 3, 5.0);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    EXPECT_NEAR(tr.s[k], 1.0 / 3, 1e-6);
    EXPECT_NEAR(tr.x[k], 2.0 / 3, 1e-6);
  }
  EXPECT_NEAR(tr.t.back(), 5.0, 1e-12);
}

TEST(IntegrateDde, TrajectoryInvariants) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ChemostatModel m = model(0.3, 0.15, 0.3, 512);
  const PeriodicSignal v = compute_vstar(m);
  const HistoryFn star = vstar_history(m, v);
  double mean_D = 0.0;
  for (double d : m.D.samples()) mean_D += d;
  mean_D /= static_cast<double>(m.D.size());
  for (int trial = 0; trial < 6; ++trial) {
    HistoryFn phi = star;
    const double lam = u(rng), k = 1 + 5 * u(rng);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi(i) *= lam * (0.5 + 0.5 * std::cos(k * phi.grid().node(i)));
    }
    const double x0 = 0.05 + 3 * u(rng);
    const Trajectory tr = integrate_dde(m, phi, x0, 2.0);
    for (std::size_t i = 1; i < tr.t.size(); ++i) {
      EXPECT_GT(tr.s[i], 0.0);
      EXPECT_GT(tr.x[i], 0.0);
      EXPECT_LT(tr.s[i], vstar_at(v, tr.t[i]));
      if (tr.t[i] <= 1.0) EXPECT_GT(tr.x[i], std::exp(-mean_D) * x0);
    }
  }
}

TEST(Poincare, TrivialFixedPoint) {
  const ChemostatModel m = model(0.25, 0.125, 0.3);
  const HistoryFn star = vstar_history(m, compute_vstar(m));
  const PoincareImage p = poincare_map(m, star, 0.0);
  EXPECT_LE(sup_distance(p.s_omega, star), 1e-8);
  EXPECT_EQ(p.x_omega, 0.0);
}

TEST(Poincare, EquilibriumMapsToItself) {
  const ChemostatModel m = model(0.25, 0.0, 0.5);
  const HistoryFn eq = constant_history(m, 1.0 / 3);
  const PoincareImage p = poincare_map(m, eq, 2.0 / 3);
  EXPECT_LE(sup_distance(p.s_omega, eq), 1e-6);
  EXPECT_NEAR(p.x_omega, 2.0 / 3, 1e-6);
}

TEST(Poincare, OutputStaysAdmissible) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ChemostatModel m = model(0.25, 0.125, 0.3);
  const HistoryFn star = vstar_history(m, compute_vstar(m));
  for (int trial = 0; trial < 6; ++trial) {
    HistoryFn phi = star;
    for (std::size_t i = 0; i < phi.size(); ++i) phi(i) *= u(rng) * 0.2 + 0.8 * (trial % 2);
    const PoincareImage p = poincare_map(m, phi, 4 * u(rng));
    for (std::size_t i = 0; i < star.size(); ++i) {
      EXPECT_GE(p.s_omega(i), -1e-10);
      EXPECT_LE(p.s_omega(i), star(i) + 1e-10);
    }
    EXPECT_GE(p.x_omega, 0.0);
  }
}

TEST(Poincare, StepHalvingChangesOutputsLittle) {
  const auto image = [](std::size_t steps) {
    const ChemostatModel m = model(0.25, 0.125, 0.3, steps);
    HistoryFn phi = vstar_history(m, compute_vstar(m));
    phi *= 0.5;
    return poincare_map(m, phi, 0.5);
  };
  const PoincareImage coarse = image(1024);
  const PoincareImage fine = image(2048);
  double change = std::abs(coarse.x_omega - fine.x_omega);
  for (int i = 0; i <= 30; ++i) {
    const double t = -0.3 + 0.3 * i / 30.0;
    change = std::max(change, std::abs(coarse.s_omega.eval(t) - fine.s_omega.eval(t)));
  }
  EXPECT_LE(change, 1e-6);
}

TEST(InnerFixedPoint, ZeroBiomassGivesVstar) {
  const ChemostatModel m = model(0.25, 0.125, 0.3);
  const HistoryFn star = vstar_history(m, compute_vstar(m));
  const InnerFixedPoint f = inner_fixed_point(m, 0.0);
  EXPECT_LE(sup_distance(f.phi, star), 1e-9);
  EXPECT_LE(f.residual, 1e-9);
}

TEST(InnerFixedPoint, ConstantModelEquilibrium) {
  const ChemostatModel m = model(0.25, 0.0, 0.5);
  const InnerFixedPoint f = inner_fixed_point(m, 2.0 / 3);
  for (double v : f.phi.values()) EXPECT_NEAR(v, 1.0 / 3, 1e-6);
}

TEST(InnerFixedPoint, LargeBiomassStarvesGrowth) {
  const ChemostatModel m = model(0.25, 0.0, 0.5);
  double mean_D = 0.25, prev = 0.0;
  for (double x0 : {1e2, 1e3}) {
    const InnerFixedPoint f = inner_fixed_point(m, x0);
    EXPECT_LE(f.residual, 1e-9);
    const double mean_mu = phi_functional(m, x0, f.phi) + mean_D;
    EXPECT_GT(mean_mu, 0.0);
    if (prev > 0) EXPECT_LT(mean_mu, prev / 5);
    prev = mean_mu;
  }
}

TEST(InnerFixedPoint, LogIdentityHolds) {
  const ChemostatModel m = model(0.25, 0.125, 0.3);
  for (double x0 : {0.2, 0.7, 3.0}) {
    const InnerFixedPoint f = inner_fixed_point(m, x0);
    const PoincareImage p = poincare_map(m, f.phi, x0);
    const double phi = phi_functional(m, x0, f.phi);
    EXPECT_NEAR(std::log(p.x_omega) - std::log(x0), m.omega * phi, 1e-8);
  }
}

TEST(PhiFunctional, ZeroBiomassEqualsTheMargin) {
  for (const ChemostatModel& m : {model(0.25, 0.0, 0.5), model(0.25, 0.125, 0.3), model(0.6, 0.2, 0.4)}) {
    const HistoryFn star = vstar_history(m, compute_vstar(m));
    EXPECT_NEAR(phi_functional(m, 0.0, star), existence_margin(m), 1e-8);
  }
}

TEST(PhiFunctional, EquilibriumAndLargeBiomass) {
  const ChemostatModel m = model(0.25, 0.0, 0.5);
  EXPECT_NEAR(phi_functional(m, 2.0 / 3, constant_history(m, 1.0 / 3)), 0.0, 1e-8);
  const InnerFixedPoint f = inner_fixed_point(m, 1e3);
  EXPECT_LT(phi_functional(m, 1e3, f.phi), 0.0);
}

TEST(PhiFunctional, AgreesWithTrajectoryQuadrature) {
  const ChemostatModel m = model(0.25, 0.125, 0.3, 1024);
  const HistoryFn star = vstar_history(m, compute_vstar(m));
  HistoryFn phi = star;
  phi *= 0.6;
  const Trajectory tr = integrate_dde(m, phi, 0.4, 1.0);
  const auto mu = monod(1, 1);
  const double oracle = mean_trapezoid(tr, [&](double, double s) { return mu(s); }, 1.0) - 0.25;
  EXPECT_NEAR(phi_functional(m, 0.4, phi), oracle, 1e-6);
}

TEST(ExistenceMargin, ConstantCases) {
  EXPECT_NEAR(existence_margin(model(0.25, 0.0, 0.5)), 0.25, 1e-12);
  EXPECT_NEAR(existence_margin(model(0.6, 0.0, 0.5)), -0.1, 1e-12);
  ChemostatModel zero = model(0.25, 0.1, 0.5);
  zero.mu = [](double) { return 0.0; };
  EXPECT_NEAR(existence_margin(zero), -0.25, 1e-12);
}

TEST(FindPeriodicOrbit, ConstantModelEquilibrium) {
  const auto r = find_periodic_orbit(model(0.25, 0.0, 0.5, 1024));
  const auto* orbit = std::get_if<PeriodicOrbit>(&r);
  ASSERT_NE(orbit, nullptr);
  EXPECT_NEAR(orbit->x0, 2.0 / 3, 1e-5);
  for (double v : orbit->phi.values()) EXPECT_NEAR(v, 1.0 / 3, 1e-5);
  EXPECT_TRUE(orbit->verified());
  EXPECT_GT(orbit->scan_probes, 0);
}

TEST(FindPeriodicOrbit, WashoutGivesACertificate) {
  const auto r = find_periodic_orbit(model(0.6, 0.0, 0.5));
  const auto* cert = std::get_if<NonexistenceCertificate>(&r);
  ASSERT_NE(cert, nullptr);
  EXPECT_NEAR(cert->margin, -0.1, 1e-9);
  EXPECT_NEAR(cert->mean_D, 0.6, 1e-12);
  EXPECT_NEAR(cert->mean_mu_vstar, 0.5, 1e-9);
}

TEST(FindPeriodicOrbit, PeriodicDilutionOrbitIsVerified) {
  const ChemostatModel m = model(0.25, 0.125, 0.3, 1024);
  const auto r = find_periodic_orbit(m);
  const auto* orbit = std::get_if<PeriodicOrbit>(&r);
  ASSERT_NE(orbit, nullptr);
  EXPECT_TRUE(orbit->verified());
  EXPECT_LE(orbit->poincare_residual, 1e-7);
  EXPECT_LE(orbit->log_identity_defect, 1e-8);
  EXPECT_LE(std::abs(orbit->phi_value), 1e-8);
  // Independent check of the returned orbit.
  const PoincareImage p = poincare_map(m, orbit->phi, orbit->x0);
  EXPECT_LE(sup_distance(p.s_omega, orbit->phi), 1e-7);
  EXPECT_NEAR(p.x_omega, orbit->x0, 1e-7);
}

TEST(FindPeriodicOrbit, ScanLimitIsReported) {
  try {
    find_periodic_orbit(model(0.25, 0.0, 0.5, 256), 1e-3);
    FAIL() << "expected a throw";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScanExhausted);
  }
}
