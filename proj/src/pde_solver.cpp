#include "spinswap/pde_solver.hpp"

#include "spinswap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace spinswap::pde {

namespace {

constexpr double kMaxKineticStep = 0.1;
constexpr double kNegativeTolerance = 1e-12;

void require_grid(std::span<const double> profile, const RadialGrid& grid) {
  if (profile.size() != grid.size()) throw GridMismatch("profile length differs from grid size");
}

}  // namespace

void KineticParams::validate(const RadialGrid& grid) const {
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be nonnegative");
  if (!(d_plus >= 0.0) || !(d_minus >= 0.0)) throw ConfigError("diffusion coefficients must be nonnegative");
  if (!(gamma0 >= 0.0) || !(gamma1 >= 0.0)) throw ConfigError("generation rates must be nonnegative");
  if (w.size() != grid.size()) throw GridMismatch("form factor is not sampled on the solver grid");
  if (std::abs(radial_mass(w, grid) - 1.0) > 1e-9) throw ConfigError("form factor must have unit mass");
}

HierarchyField::HierarchyField(const RadialGrid& grid_, std::size_t truncation_)
    : grid(grid_), truncation(truncation_), f(truncation_ + 1, Profile(grid_.size(), 0.0)),
      tail(grid_.size(), 0.0) {
  if (truncation_ < 1) throw ConfigError("index truncation must be at least 1");
}

HierarchyField HierarchyField::singlet_pairs(const RadialGrid& grid, std::size_t truncation, double g0,
                                             std::span<const double> w) {
  require_grid(w, grid);
  HierarchyField state(grid, truncation);
  for (std::size_t i = 0; i < grid.size(); ++i) state.f[0][i] = g0 * w[i];
  state.recompute_density();
  return state;
}

double HierarchyField::recompute_density() {
  double total = radial_mass(tail, grid);
  for (const auto& profile : f) total += radial_mass(profile, grid);
  g = total;
  return g;
}

double HierarchyField::min_value() const {
  double lo = *std::min_element(tail.begin(), tail.end());
  for (const auto& profile : f) lo = std::min(lo, *std::min_element(profile.begin(), profile.end()));
  return lo;
}

double HierarchyField::max_value() const {
  double hi = *std::max_element(tail.begin(), tail.end());
  for (const auto& profile : f) hi = std::max(hi, *std::max_element(profile.begin(), profile.end()));
  return hi;
}

Profile HierarchyField::total_profile() const {
  Profile out = tail;
  for (const auto& profile : f)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += profile[i];
  return out;
}

bool XiField::in_physical_range(double tol) const {
  return std::all_of(xi.begin(), xi.end(), [tol](double v) { return v >= -1.0 / 3.0 - tol && v <= 1.0 + tol; });
}

double diffusion_dt_limit(const RadialGrid& grid, const KineticParams& p) {
  const double d = p.relative_diffusion();
  if (d <= 0.0) return std::numeric_limits<double>::infinity();
  return grid.spacing() * grid.spacing() / (6.0 * d);
}

void check_stability(const RadialGrid& grid, const KineticParams& p, double g, double dt) {
  if (!(dt > 0.0)) throw StabilityViolation("time step must be positive");
  const double limit = diffusion_dt_limit(grid, p);
  if (dt > limit)
    throw StabilityViolation("dt = " + std::to_string(dt) + " exceeds the diffusion bound " + std::to_string(limit));
  if (dt * p.kappa * g > kMaxKineticStep)
    throw StabilityViolation("dt kappa g = " + std::to_string(dt * p.kappa * g) + " exceeds 0.1");
}

void radial_laplacian(std::span<const double> u, const RadialGrid& grid, double diffusion, std::span<double> out) {
  require_grid(u, grid);
  require_grid(out, grid);
  const std::size_t m = grid.size();
  std::fill(out.begin(), out.end(), 0.0);
  const double inv_dr = 1.0 / grid.spacing();
  // Face between shells i and i+1; the face at r = 0 has zero area and the
  // outer wall carries no flux.
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double flux = diffusion * grid.outer_face_area(i) * (u[i + 1] - u[i]) * inv_dr;
    out[i] += flux;
    out[i + 1] -= flux;
  }
  for (std::size_t i = 0; i < m; ++i) out[i] /= grid.weight(i);
}

HierarchyStepper::HierarchyStepper(const RadialGrid& grid, std::size_t truncation)
    : grid_(grid), truncation_(truncation), transform_(std::make_shared<RadialTransform>(grid)) {
  if (truncation < 1) throw ConfigError("index truncation must be at least 1");
}

std::vector<Profile> HierarchyStepper::swap_gain_profiles(const HierarchyField& state,
                                                          const swap::SwapWeights& weights) const {
  if (!(state.grid == grid_) || state.truncation != truncation_)
    throw GridMismatch("hierarchy state does not match the stepper layout");
  const std::size_t indices = truncation_ + 1;
  const std::size_t profiles = indices + 1;  // + tail
  const std::size_t nk = transform_->spectrum_size();
  const double total_weight = weights.singlet + weights.triplet;

  std::vector<std::vector<double>> spectra(profiles, std::vector<double>(nk));
  std::vector<double> masses(profiles);
  for (std::size_t n = 0; n < profiles; ++n) {
    const Profile& src = n < indices ? state.f[n] : state.tail;
    transform_->forward(src, spectra[n]);
    masses[n] = radial_mass(src, grid_);
  }

  std::vector<std::vector<double>> gain_spectra(profiles, std::vector<double>(nk));
  std::vector<double> node(indices), node_gain(indices);
  for (std::size_t j = 0; j < nk; ++j) {
    double total = 0.0;
    for (std::size_t n = 0; n < indices; ++n) {
      node[n] = spectra[n][j];
      total += node[n];
    }
    total += spectra[indices][j];
    swap::swap_gain_into(node, node, node_gain, weights);
    double kept = 0.0;
    for (std::size_t n = 0; n < indices; ++n) {
      gain_spectra[n][j] = node_gain[n];
      kept += node_gain[n];
    }
    // Any product touching the tail, or landing above N, feeds the tail.
    gain_spectra[indices][j] = total_weight * total * total - kept;
  }

  // Same bilinear structure on the masses gives the exact target per index.
  std::vector<double> mass_head(masses.begin(), masses.begin() + static_cast<std::ptrdiff_t>(indices));
  std::vector<double> target(indices);
  swap::swap_gain_into(mass_head, mass_head, target, weights);
  const double mass_total = std::accumulate(masses.begin(), masses.end(), 0.0);
  const double tail_target =
      total_weight * mass_total * mass_total - std::accumulate(target.begin(), target.end(), 0.0);

  std::vector<Profile> out(profiles, Profile(grid_.size()));
  std::vector<double> padded(nk);
  for (std::size_t n = 0; n < profiles; ++n) {
    transform_->inverse(gain_spectra[n], padded);
    fold_to_grid(padded, n < indices ? target[n] : tail_target, grid_, out[n]);
  }
  return out;
}

std::vector<Profile> HierarchyStepper::rates(const HierarchyField& state, const KineticParams& p) const {
  const std::size_t indices = truncation_ + 1;
  const std::size_t m = grid_.size();
  const double d = p.relative_diffusion();
  const double loss = 2.0 * p.kappa * state.g;

  std::vector<Profile> out =
      p.kappa > 0.0 ? swap_gain_profiles(state) : std::vector<Profile>(indices + 1, Profile(m, 0.0));
  Profile lap(m);
  for (std::size_t n = 0; n <= indices; ++n) {
    const Profile& f = n < indices ? state.f[n] : state.tail;
    radial_laplacian(f, grid_, d, lap);
    const double source = n == 0 ? p.gamma0 : (n == 1 ? p.gamma1 : 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      out[n][i] = p.kappa * out[n][i] - loss * f[i] + lap[i] + source * p.w[i];
    }
  }
  return out;
}

HierarchyField HierarchyStepper::step(const HierarchyField& state, const KineticParams& p, double dt) const {
  check_stability(grid_, p, state.g, dt);
  const auto r = rates(state, p);
  HierarchyField next = state;
  const std::size_t indices = truncation_ + 1;
  for (std::size_t n = 0; n <= indices; ++n) {
    Profile& f = n < indices ? next.f[n] : next.tail;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += dt * r[n][i];
  }
  next.recompute_density();
  const double scale = std::max(next.max_value(), std::numeric_limits<double>::min());
  if (next.min_value() < -kNegativeTolerance * scale)
    throw NegativeDensity("pair density fell to " + std::to_string(next.min_value()) + "; reduce dt");
  return next;
}

HierarchyField step_hierarchy(const HierarchyField& state, const KineticParams& p, double dt) {
  return HierarchyStepper(state.grid, state.truncation).step(state, p, dt);
}

XiField xi_from_hierarchy(const HierarchyField& state) {
  if (!(state.g > 0.0)) throw ZeroDensity("xi is undefined at zero radical density");
  const double inv_g2 = 1.0 / (state.g * state.g);
  XiField out{state.grid, Profile(state.grid.size(), 0.0), 0.0};
  double weight = 1.0;
  for (std::size_t n = 0; n <= state.truncation; ++n) {
    for (std::size_t i = 0; i < out.xi.size(); ++i) out.xi[i] += weight * state.f[n][i] * inv_g2;
    weight *= -1.0 / 3.0;
  }
  const double tail_max = *std::max_element(state.tail.begin(), state.tail.end());
  out.truncation_bound = std::abs(weight) * std::max(tail_max, 0.0) * inv_g2;
  return out;
}

Profile xi_rhs_fixed_density(std::span<const double> xi, double g, const RadialGrid& grid, const KineticParams& p) {
  require_grid(xi, grid);
  if (!(g > 0.0)) throw ZeroDensity("xi equation needs g > 0");
  Profile out(grid.size());
  radial_laplacian(xi, grid, p.relative_diffusion(), out);
  const double source = p.xi_source() / (g * g);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += -2.0 * p.kappa * g * xi[i] + source * p.w[i];
  return out;
}

ScalarXiState step_xi(const ScalarXiState& state, const KineticParams& p, double dt, const StepOptions& opts) {
  const RadialGrid& grid = state.xi.grid;
  check_stability(grid, p, state.g, dt);
  const double g = state.g;
  const Profile rhs = xi_rhs_fixed_density(state.xi.xi, g, grid, p);
  const double g_next = opts.freeze_density ? g : g + dt * (-p.kappa * g * g + p.gamma_total());
  if (!(g_next > 0.0)) throw ZeroDensity("radical density reached zero");
  const double rescale = (g / g_next) * (g / g_next);

  ScalarXiState next{XiField{grid, Profile(grid.size()), state.xi.truncation_bound}, g_next};
  for (std::size_t i = 0; i < grid.size(); ++i) next.xi.xi[i] = rescale * (state.xi.xi[i] + dt * rhs[i]);
  return next;
}

Profile solve_steady_xi(const RadialGrid& grid, double g, const KineticParams& p) {
  if (!(g > 0.0)) throw ZeroDensity("steady xi needs g > 0");
  const std::size_t m = grid.size();
  const double d = p.relative_diffusion();
  const double inv_dr = 1.0 / grid.spacing();
  // Tridiagonal rows of D lap - 2 kappa g, scaled by the shell weights.
  std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double wi = grid.weight(i);
    diag[i] -= 2.0 * p.kappa * g * wi;
    rhs[i] = -p.xi_source() / (g * g) * p.w[i] * wi;
    if (i + 1 < m) {
      const double c = d * grid.outer_face_area(i) * inv_dr;
      upper[i] += c;
      diag[i] -= c;
      lower[i + 1] += c;
      diag[i + 1] -= c;
    }
  }
  // Thomas algorithm.
  for (std::size_t i = 1; i < m; ++i) {
    const double factor = lower[i] / diag[i - 1];
    diag[i] -= factor * upper[i - 1];
    rhs[i] -= factor * rhs[i - 1];
  }
  Profile xi(m);
  xi[m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) xi[i] = (rhs[i] - upper[i] * xi[i + 1]) / diag[i];
  return xi;
}

double analytic_density(double g0, double t, double kappa, double gamma_total) {
  if (kappa == 0.0) return g0 + gamma_total * t;
  if (gamma_total == 0.0) return g0 / (1.0 + kappa * g0 * t);
  const double gss = std::sqrt(gamma_total / kappa);
  const double th = std::tanh(kappa * gss * t);
  return gss * (g0 + gss * th) / (gss + g0 * th);
}

double nu_ratio_from_xi(double xi0) {
  if (!(xi0 >= -1.0 / 3.0 - 1e-12) || !(xi0 < 1.0))
    throw DomainError("xi(0) = " + std::to_string(xi0) + " outside [-1/3, 1)");
  return (1.0 + 3.0 * xi0) / (3.0 - 3.0 * xi0);
}

}  // namespace spinswap::pde
