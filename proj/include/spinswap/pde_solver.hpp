#pragma once

// Deterministic solvers for the spatially homogeneous pair-density hierarchy
// in the relative coordinate r = |r1 - r2|, and for the scalar correlation
// parameter xi(r) that the hierarchy implies.

#include "spinswap/radial.hpp"
#include "spinswap/swap_calculus.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace spinswap::pde {

inline constexpr std::size_t kDefaultTruncation = 40;

struct KineticParams {
  double kappa = 0.0;    // recombination rate coefficient, volume / time
  double d_plus = 0.0;   // length^2 / time
  double d_minus = 0.0;  // length^2 / time
  double gamma0 = 0.0;   // singlet pair generation, pairs / volume / time
  double gamma1 = 0.0;   // isotropic triplet pair generation
  Profile w;             // normalized form factor on the grid

  double relative_diffusion() const { return d_plus + d_minus; }
  double gamma_total() const { return gamma0 + gamma1; }
  // gamma0 - gamma1/3: the only source that survives the xi weighting.
  double xi_source() const { return gamma0 - gamma1 / 3.0; }

  // Throws ConfigError on negative coefficients or an unnormalized w.
  void validate(const RadialGrid& grid) const;
};

// f^(n)(r) for n = 0..N plus one aggregated profile for all n > N. Swapping
// only raises indices, so the aggregate closes the hierarchy without losing
// pair mass; its xi weight is bounded by (1/3)^(N+1).
struct HierarchyField {
  RadialGrid grid;
  std::size_t truncation;
  std::vector<Profile> f;  // N + 1 profiles
  Profile tail;
  double g = 0.0;  // radical density of either sign, sum_n int f^(n) d^3r

  HierarchyField(const RadialGrid& grid, std::size_t truncation);

  // Geminate singlet pairs of total density g0 with separation profile w.
  static HierarchyField singlet_pairs(const RadialGrid& grid, std::size_t truncation, double g0,
                                      std::span<const double> w);

  double recompute_density();
  double min_value() const;
  double max_value() const;
  Profile total_profile() const;
};

struct XiField {
  RadialGrid grid;
  Profile xi;
  // Upper bound on |xi| error from the truncated index range.
  double truncation_bound = 0.0;

  bool in_physical_range(double tol = 1e-12) const;
};

struct ScalarXiState {
  XiField xi;
  double g = 0.0;
};

struct StepOptions {
  // Freezes g in the scalar xi stepper (used for the pure decay oracle).
  bool freeze_density = false;
};

// Largest dt accepted for diffusion: dr^2 / (6 (D+ + D-)).
double diffusion_dt_limit(const RadialGrid& grid, const KineticParams& p);
// Throws StabilityViolation unless dt <= diffusion limit and dt kappa g <= 0.1.
void check_stability(const RadialGrid& grid, const KineticParams& p, double g, double dt);

// Finite-volume (D+ + D-) r^-2 d/dr (r^2 d/dr) with a zero-flux outer wall.
void radial_laplacian(std::span<const double> u, const RadialGrid& grid, double diffusion, std::span<double> out);

// Time derivative of every hierarchy profile; element N + 1 is the tail.
class HierarchyStepper {
 public:
  HierarchyStepper(const RadialGrid& grid, std::size_t truncation);

  std::vector<Profile> rates(const HierarchyField& state, const KineticParams& p) const;
  // Forward Euler step. Throws StabilityViolation before stepping and
  // NegativeDensity if a node drops below -1e-12 max f.
  HierarchyField step(const HierarchyField& state, const KineticParams& p, double dt) const;

  // Swapping gain per index (N + 2 profiles, last is the tail) with unit
  // kappa, computed node-by-node in transform space with swap_gain_into.
  std::vector<Profile> swap_gain_profiles(const HierarchyField& state,
                                          const swap::SwapWeights& weights = {}) const;

 private:
  RadialGrid grid_;
  std::size_t truncation_;
  std::shared_ptr<const RadialTransform> transform_;
};

HierarchyField step_hierarchy(const HierarchyField& state, const KineticParams& p, double dt);

// xi(r) = sum_{n<=N} (-1/3)^n f^(n)(r) / g^2. Throws ZeroDensity if g <= 0.
XiField xi_from_hierarchy(const HierarchyField& state);

// d xi/dt = -2 kappa g xi - 2 (g'/g) xi + (D+ + D-) lap xi + (gamma0 - gamma1/3) w / g^2
// with g' = -kappa g^2 + gamma_tot. The g'/g term vanishes at stationary g,
// where this is exactly the swap-free scalar equation. Stepped in the
// conservative variable xi g^2 and divided by the updated g^2.
ScalarXiState step_xi(const ScalarXiState& state, const KineticParams& p, double dt, const StepOptions& opts = {});

// Right-hand side of the scalar equation at fixed g (the stationary form).
Profile xi_rhs_fixed_density(std::span<const double> xi, double g, const RadialGrid& grid, const KineticParams& p);

// Direct solve of (D+ + D-) lap xi - 2 kappa g xi = -(gamma0 - gamma1/3) w / g^2.
Profile solve_steady_xi(const RadialGrid& grid, double g, const KineticParams& p);

// Closed-form solution of dg/dt = -kappa g^2 + gamma_tot.
double analytic_density(double g0, double t, double kappa, double gamma_total);

// nu_S / nu_T = (1 + 3 xi0) / (3 - 3 xi0). Throws DomainError at xi0 = 1 or
// outside [-1/3, 1).
double nu_ratio_from_xi(double xi0);

}  // namespace spinswap::pde
