#pragma once

// Runs the hierarchy solver and the scalar xi solver side by side from the
// same initial data and records how closely they agree.

#include "spinswap/pde_solver.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace spinswap::pde {

struct PdeRunConfig {
  double r_max = 32.0;
  std::size_t shells = 256;
  std::size_t truncation = kDefaultTruncation;
  double kappa = 1.0;
  double d_plus = 0.25;
  double d_minus = 0.25;
  double gamma0 = 2.0 / 3.0;
  double gamma1 = 1.0 / 3.0;
  FormFactor form_factor{};
  // Initial geminate singlet pairs, g0 * w(r) in f^(0).
  double initial_density = 0.5;
  double dt = 0.005;
  double t_end = 6.0;
  std::size_t checkpoints = 10;
  // Number of full xi(r) snapshots recorded over the run (0 = none).
  std::size_t snapshots = 5;
  // Time-series sampling interval in steps.
  std::size_t series_every = 10;
};

struct PdeCheckpoint {
  double t = 0.0;
  double g_hierarchy = 0.0;
  double g_scalar = 0.0;
  double g_analytic = 0.0;
  double g_relative_error = 0.0;  // hierarchy vs analytic
  double xi_relative_diff = 0.0;  // L-infinity over the grid, relative to max |xi_scalar|
  double xi0_hierarchy = 0.0;
  double xi0_scalar = 0.0;
  double truncation_bound = 0.0;
  double tail_fraction = 0.0;  // share of g carried by indices above N
  bool xi_in_range = true;
};

struct PdeSeriesRow {
  double t;
  double g_hierarchy;
  double g_scalar;
  double g_analytic;
  double xi0_hierarchy;
  double xi0_scalar;
};

struct PdeSnapshot {
  double t;
  Profile xi_hierarchy;
  Profile xi_scalar;
};

struct PdeReport {
  explicit PdeReport(RadialGrid g) : grid(std::move(g)) {}

  RadialGrid grid;
  std::size_t steps = 0;
  double dt = 0.0;
  std::vector<PdeCheckpoint> checkpoints;
  std::vector<PdeSeriesRow> series;
  std::vector<PdeSnapshot> snapshots;
  Profile final_xi_hierarchy;
  Profile final_xi_scalar;
  double max_xi_relative_diff = 0.0;
  double max_g_relative_error = 0.0;
  bool empty = false;  // nothing to evolve (no pairs, no generation)
};

KineticParams make_params(const PdeRunConfig& cfg, const RadialGrid& grid);

// Throws ConfigError / StabilityViolation before any stepping.
PdeReport run_pde_comparison(const PdeRunConfig& cfg);

}  // namespace spinswap::pde
