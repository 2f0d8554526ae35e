#include "spinswap/errors.hpp"
#include "spinswap/pde_driver.hpp"
#include "spinswap/pde_solver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace pde = spinswap::pde;

namespace {

pde::KineticParams params(const pde::RadialGrid& grid, double kappa, double d, double g0, double g1) {
  pde::KineticParams p;
  p.kappa = kappa;
  p.d_plus = p.d_minus = d;
  p.gamma0 = g0;
  p.gamma1 = g1;
  p.w = pde::discretize({}, grid);
  return p;
}

// Classical RK4 on dg/dt = -kappa g^2 + gamma.
double rk4_density(double g, double t, double kappa, double gamma, int steps = 4000) {
  const double h = t / steps;
  auto f = [&](double x) { return -kappa * x * x + gamma; };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(g), k2 = f(g + h * k1 / 2), k3 = f(g + h * k2 / 2), k4 = f(g + h * k3);
    g += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
  }
  return g;
}

}  // namespace

TEST(AnalyticDensity, MatchesRungeKutta) {
  for (double g0 : {0.0, 0.3, 2.0})
    for (double t : {0.1, 1.0, 5.0}) {
      EXPECT_NEAR(pde::analytic_density(g0, t, 1.3, 0.7), rk4_density(g0, t, 1.3, 0.7), 1e-10);
      EXPECT_NEAR(pde::analytic_density(g0, t, 1.3, 0.0), rk4_density(g0, t, 1.3, 0.0), 1e-10);
      EXPECT_NEAR(pde::analytic_density(g0, t, 0.0, 0.7), g0 + 0.7 * t, 1e-12);
    }
}

TEST(NuRatio, FollowsXi) {
  EXPECT_NEAR(pde::nu_ratio_from_xi(0.0), 1.0 / 3.0, 1e-16);
  EXPECT_NEAR(pde::nu_ratio_from_xi(-1.0 / 3.0), 0.0, 1e-16);
  EXPECT_NEAR(pde::nu_ratio_from_xi(1.0 / 3.0), 1.0, 1e-15);
  EXPECT_THROW(pde::nu_ratio_from_xi(1.0), spinswap::DomainError);
  EXPECT_THROW(pde::nu_ratio_from_xi(-0.5), spinswap::DomainError);
}

TEST(Stability, LimitsAreEnforced) {
  const pde::RadialGrid grid(16.0, 64);
  const auto p = params(grid, 1.0, 0.5, 1.0, 0.0);
  const double limit = pde::diffusion_dt_limit(grid, p);
  EXPECT_DOUBLE_EQ(limit, grid.spacing() * grid.spacing() / 6.0);
  EXPECT_NO_THROW(pde::check_stability(grid, p, 1.0, 0.9 * limit));
  EXPECT_THROW(pde::check_stability(grid, p, 1.0, 1.1 * limit), spinswap::StabilityViolation);
  EXPECT_THROW(pde::check_stability(grid, params(grid, 1.0, 0.0, 1.0, 0.0), 10.0, 0.02),
               spinswap::StabilityViolation);
}

TEST(RadialLaplacian, ConservesMassAndAnnihilatesConstants) {
  const pde::RadialGrid grid(8.0, 64);
  pde::Profile u(grid.size()), out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) u[i] = std::exp(-grid.radius(i));
  pde::radial_laplacian(u, grid, 0.7, out);
  EXPECT_NEAR(pde::radial_mass(out, grid), 0.0, 1e-12);
  std::fill(u.begin(), u.end(), 3.0);
  pde::radial_laplacian(u, grid, 0.7, out);
  for (double x : out) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(RadialLaplacian, QuadraticGivesSixD) {
  // Face fluxes of r^2 are exact; only the midpoint shell volume differs from
  // the true one, giving 6D (1 + dr^2 / (12 r^2)) on interior shells.
  const pde::RadialGrid grid(8.0, 128);
  pde::Profile u(grid.size()), out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) u[i] = grid.radius(i) * grid.radius(i);
  pde::radial_laplacian(u, grid, 0.5, out);
  const double dr = grid.spacing();
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double r = grid.radius(i);
    EXPECT_NEAR(out[i], 3.0 * (1.0 + dr * dr / (12.0 * r * r)), 1e-11) << "i=" << i;
  }
  EXPECT_NEAR(out[grid.size() / 2], 3.0, 1e-3);
}

TEST(ScalarXi, PureDecayAtFrozenDensity) {
  const pde::RadialGrid grid(16.0, 64);
  const auto p = params(grid, 2.0, 0.0, 0.0, 0.0);
  pde::ScalarXiState s{{grid, pde::Profile(grid.size(), 0.4)}, 0.5};
  const double dt = 0.01;
  const int steps = 200;
  for (int k = 0; k < steps; ++k) s = pde::step_xi(s, p, dt, {true});
  const double discrete = 0.4 * std::pow(1.0 - 2.0 * 2.0 * 0.5 * dt, steps);
  for (double x : s.xi.xi) EXPECT_NEAR(x, discrete, 1e-14);
  EXPECT_NEAR(s.xi.xi[0], 0.4 * std::exp(-2.0 * 2.0 * 0.5 * dt * steps), 2e-3 * 0.4);
}

TEST(ScalarXi, TimeSteppingReachesTheDirectSteadySolve) {
  const pde::RadialGrid grid(16.0, 64);
  const auto p = params(grid, 1.0, 0.25, 0.6, 0.3);
  const double g = 1.0;
  const auto steady = pde::solve_steady_xi(grid, g, p);
  pde::ScalarXiState s{{grid, pde::Profile(grid.size(), 0.0)}, g};
  const double dt = 0.4 * pde::diffusion_dt_limit(grid, p);
  for (int k = 0; k < static_cast<int>(30.0 / dt); ++k) s = pde::step_xi(s, p, dt, {true});
  const double scale = *std::max_element(steady.begin(), steady.end());
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(s.xi.xi[i], steady[i], 1e-9 * scale);
  // The direct solve satisfies the stationary equation.
  const auto rhs = pde::xi_rhs_fixed_density(steady, g, grid, p);
  for (double x : rhs) EXPECT_NEAR(x, 0.0, 1e-10);
}

TEST(Hierarchy, SingletPairsHaveXiEqualToWOverG) {
  const pde::RadialGrid grid(16.0, 64);
  const auto w = pde::discretize({}, grid);
  const auto h = pde::HierarchyField::singlet_pairs(grid, 10, 0.5, w);
  EXPECT_NEAR(h.g, 0.5, 1e-15);
  const auto xi = pde::xi_from_hierarchy(h);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(xi.xi[i], w[i] / 0.5, 1e-15);
  EXPECT_THROW(pde::xi_from_hierarchy(pde::HierarchyField(grid, 10)), spinswap::ZeroDensity);
}

TEST(Hierarchy, GainMassIsDensitySquaredAndXiWeightCancels) {
  const pde::RadialGrid grid(16.0, 64);
  const std::size_t n_max = 6;
  pde::HierarchyField h(grid, n_max);
  for (std::size_t n = 0; n <= n_max; ++n)
    for (std::size_t i = 0; i < grid.size(); ++i)
      h.f[n][i] = (1.0 + static_cast<double>(n)) * std::exp(-grid.radius(i) / (1.0 + 0.3 * static_cast<double>(n)));
  for (std::size_t i = 0; i < grid.size(); ++i) h.tail[i] = 0.2 * std::exp(-grid.radius(i) / 4.0);
  h.recompute_density();
  const pde::HierarchyStepper stepper(grid, n_max);
  const auto gains = stepper.swap_gain_profiles(h);
  ASSERT_EQ(gains.size(), n_max + 2);
  double total = 0.0;
  for (const auto& gain : gains) total += pde::radial_mass(gain, grid);
  EXPECT_NEAR(total, h.g * h.g, 1e-10 * h.g * h.g);
  // Weighted sum over kept indices equals minus the tail part, which has
  // |weight| <= (1/3)^(N+1).
  const double bound = std::pow(1.0 / 3.0, static_cast<double>(n_max + 1));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double kept = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) kept += std::pow(-1.0 / 3.0, static_cast<double>(n)) * gains[n][i];
    EXPECT_LE(std::abs(kept), bound * std::abs(gains[n_max + 1][i]) + 1e-12 * h.g * h.g) << "i=" << i;
  }
}

TEST(Hierarchy, MassBalanceFollowsAnalyticDensity) {
  const pde::RadialGrid grid(16.0, 64);
  const auto p = params(grid, 1.0, 0.25, 0.4, 0.2);
  auto h = pde::HierarchyField::singlet_pairs(grid, 12, 0.3, p.w);
  const double dt = 0.002;
  for (int k = 0; k < 500; ++k) h = pde::step_hierarchy(h, p, dt);
  const double exact = pde::analytic_density(0.3, 1.0, 1.0, 0.6);
  EXPECT_NEAR(h.g, exact, 2e-3 * exact);
  EXPECT_GE(h.min_value(), -1e-12 * h.max_value());
}

TEST(Hierarchy, AgreesWithScalarSolverOnSmallGrid) {
  pde::PdeRunConfig cfg;
  cfg.r_max = 16.0;
  cfg.shells = 64;
  cfg.truncation = 16;
  cfg.t_end = 1.0;
  cfg.dt = 0.01;
  cfg.checkpoints = 4;
  const auto report = pde::run_pde_comparison(cfg);
  ASSERT_EQ(report.checkpoints.size(), 4u);
  EXPECT_LT(report.max_xi_relative_diff, 1e-10);
  EXPECT_LT(report.max_g_relative_error, 5e-3);
}

TEST(Driver, EmptySystemGivesZeroOutputs) {
  pde::PdeRunConfig cfg;
  cfg.shells = 64;
  cfg.r_max = 16.0;
  cfg.gamma0 = cfg.gamma1 = 0.0;
  cfg.initial_density = 0.0;
  const auto report = pde::run_pde_comparison(cfg);
  EXPECT_TRUE(report.empty);
  for (const auto& c : report.checkpoints) {
    EXPECT_EQ(c.g_hierarchy, 0.0);
    EXPECT_EQ(c.xi0_scalar, 0.0);
  }
  for (double x : report.final_xi_hierarchy) EXPECT_EQ(x, 0.0);
}

TEST(Driver, RejectsUnstableStepBeforeRunning) {
  pde::PdeRunConfig cfg;
  cfg.dt = 0.5;
  EXPECT_THROW(pde::run_pde_comparison(cfg), spinswap::StabilityViolation);
}

TEST(Driver, StartsFromEmptyStateWithGeneration) {
  pde::PdeRunConfig cfg;
  cfg.r_max = 16.0;
  cfg.shells = 64;
  cfg.truncation = 12;
  cfg.initial_density = 0.0;
  cfg.t_end = 0.5;
  cfg.dt = 0.01;
  const auto report = pde::run_pde_comparison(cfg);
  EXPECT_FALSE(report.empty);
  EXPECT_LT(report.max_xi_relative_diff, 1e-10);
  EXPECT_NEAR(report.checkpoints.back().g_hierarchy, pde::analytic_density(0.0, 0.5, 1.0, 1.0), 1e-2);
}
