#include "spinswap/pde_driver.hpp"

#include "spinswap/errors.hpp"

#include <algorithm>
#include <cmath>

namespace spinswap::pde {

namespace {

std::size_t scheduled_step(std::size_t k, std::size_t count, std::size_t steps) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(steps) /
                                               static_cast<double>(count)));
}

double linf_relative(const Profile& a, const Profile& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

double tail_fraction(const HierarchyField& state) {
  return state.g > 0.0 ? radial_mass(state.tail, state.grid) / state.g : 0.0;
}

}  // namespace

KineticParams make_params(const PdeRunConfig& cfg, const RadialGrid& grid) {
  KineticParams p;
  p.kappa = cfg.kappa;
  p.d_plus = cfg.d_plus;
  p.d_minus = cfg.d_minus;
  p.gamma0 = cfg.gamma0;
  p.gamma1 = cfg.gamma1;
  p.w = discretize(cfg.form_factor, grid);
  p.validate(grid);
  return p;
}

PdeReport run_pde_comparison(const PdeRunConfig& cfg) {
  const RadialGrid grid(cfg.r_max, cfg.shells);
  const KineticParams params = make_params(cfg, grid);
  if (cfg.truncation < 1) throw ConfigError("truncation must be at least 1");
  if (!(cfg.initial_density >= 0.0)) throw ConfigError("initial_density must be nonnegative");
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (cfg.checkpoints < 1) throw ConfigError("checkpoints must be at least 1");

  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  const double dt = cfg.t_end / static_cast<double>(steps);

  // g moves monotonically towards sqrt(gamma/kappa), so this bounds it.
  const double g_bound =
      std::max(cfg.initial_density, cfg.kappa > 0.0 ? std::sqrt(params.gamma_total() / cfg.kappa) : 0.0);
  check_stability(grid, params, g_bound, dt);

  PdeReport report{grid};
  report.steps = steps;
  report.dt = dt;

  if (cfg.initial_density == 0.0 && params.gamma_total() == 0.0) {
    report.empty = true;
    report.final_xi_hierarchy.assign(grid.size(), 0.0);
    report.final_xi_scalar.assign(grid.size(), 0.0);
    for (std::size_t k = 1; k <= cfg.checkpoints; ++k) {
      PdeCheckpoint cp;
      cp.t = dt * static_cast<double>(scheduled_step(k, cfg.checkpoints, steps));
      report.checkpoints.push_back(cp);
    }
    return report;
  }

  const HierarchyStepper stepper(grid, cfg.truncation);
  HierarchyField hierarchy = HierarchyField::singlet_pairs(grid, cfg.truncation, cfg.initial_density, params.w);
  std::size_t step = 0;
  double g_start = cfg.initial_density;
  double t_start = 0.0;
  if (hierarchy.g == 0.0) {
    // xi is undefined at g = 0: take matching data after the first step.
    hierarchy = stepper.step(hierarchy, params, dt);
    step = 1;
    g_start = 0.0;
  }
  ScalarXiState scalar{xi_from_hierarchy(hierarchy), hierarchy.g};

  std::size_t next_checkpoint = 1;
  std::size_t next_snapshot = 1;
  auto record = [&](std::size_t s) {
    const double t = dt * static_cast<double>(s);
    const XiField xi_h = xi_from_hierarchy(hierarchy);
    const double g_exact = analytic_density(g_start, t - t_start, params.kappa, params.gamma_total());
    if (cfg.series_every > 0 && (s % cfg.series_every == 0 || s == steps)) {
      report.series.push_back({t, hierarchy.g, scalar.g, g_exact, xi_h.xi.front(), scalar.xi.xi.front()});
    }
    while (next_checkpoint <= cfg.checkpoints && scheduled_step(next_checkpoint, cfg.checkpoints, steps) == s) {
      PdeCheckpoint cp;
      cp.t = t;
      cp.g_hierarchy = hierarchy.g;
      cp.g_scalar = scalar.g;
      cp.g_analytic = g_exact;
      cp.g_relative_error = std::abs(hierarchy.g - g_exact) / g_exact;
      cp.xi_relative_diff = linf_relative(xi_h.xi, scalar.xi.xi);
      cp.xi0_hierarchy = xi_h.xi.front();
      cp.xi0_scalar = scalar.xi.xi.front();
      cp.truncation_bound = xi_h.truncation_bound;
      cp.tail_fraction = tail_fraction(hierarchy);
      cp.xi_in_range = xi_h.in_physical_range() && scalar.xi.in_physical_range();
      report.max_xi_relative_diff = std::max(report.max_xi_relative_diff, cp.xi_relative_diff);
      report.max_g_relative_error = std::max(report.max_g_relative_error, cp.g_relative_error);
      report.checkpoints.push_back(cp);
      ++next_checkpoint;
    }
    while (next_snapshot <= cfg.snapshots && scheduled_step(next_snapshot, cfg.snapshots, steps) == s) {
      report.snapshots.push_back({t, xi_h.xi, scalar.xi.xi});
      ++next_snapshot;
    }
    if (s == steps) {
      report.final_xi_hierarchy = xi_h.xi;
      report.final_xi_scalar = scalar.xi.xi;
    }
  };

  // Checkpoints scheduled before the scalar solver starts are skipped.
  while (next_checkpoint <= cfg.checkpoints && scheduled_step(next_checkpoint, cfg.checkpoints, steps) < step)
    ++next_checkpoint;
  while (next_snapshot <= cfg.snapshots && scheduled_step(next_snapshot, cfg.snapshots, steps) < step)
    ++next_snapshot;
  record(step);
  while (step < steps) {
    hierarchy = stepper.step(hierarchy, params, dt);
    scalar = step_xi(scalar, params, dt);
    ++step;
    record(step);
  }
  return report;
}

}  // namespace spinswap::pde
