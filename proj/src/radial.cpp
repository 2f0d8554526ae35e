#include "spinswap/radial.hpp"

#include "spinswap/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

namespace spinswap::pde {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RadialGrid::RadialGrid(double r_max, std::size_t shells) : r_max_(r_max), shells_(shells) {
  if (!(r_max > 0.0)) throw ConfigError("radial grid r_max must be positive");
  if (shells < kMinShells) throw ConfigError("radial grid needs at least 16 shells");
  dr_ = r_max / static_cast<double>(shells);
  weights_.resize(shells);
  for (std::size_t i = 0; i < shells; ++i) {
    const double r = radius(i);
    weights_[i] = 4.0 * kPi * r * r * dr_;
  }
}

double RadialGrid::outer_face_area(std::size_t i) const {
  const double r = static_cast<double>(i + 1) * dr_;
  return 4.0 * kPi * r * r;
}

double radial_mass(std::span<const double> profile, const RadialGrid& grid) {
  if (profile.size() != grid.size()) throw GridMismatch("profile length differs from grid size");
  return std::inner_product(profile.begin(), profile.end(), grid.weights().begin(), 0.0);
}

double FormFactor::density(double r) const {
  switch (kind) {
    case FormFactorKind::Exponential:
      return std::exp(-r / scale) / (8.0 * kPi * scale * scale * scale);
    case FormFactorKind::Gaussian: {
      const double s2 = scale * scale;
      return std::exp(-r * r / (2.0 * s2)) / std::pow(2.0 * kPi * s2, 1.5);
    }
  }
  return 0.0;
}

std::string FormFactor::name() const {
  return kind == FormFactorKind::Exponential ? "exponential" : "gaussian";
}

FormFactorKind parse_form_factor_kind(const std::string& name) {
  if (name == "exponential") return FormFactorKind::Exponential;
  if (name == "gaussian") return FormFactorKind::Gaussian;
  throw ConfigError("unknown form factor '" + name + "' (expected exponential or gaussian)");
}

Profile discretize(const FormFactor& w, const RadialGrid& grid) {
  if (!(w.scale > 0.0)) throw ConfigError("form factor scale must be positive");
  Profile out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = w.density(grid.radius(i));
  const double mass = radial_mass(out, grid);
  for (double& v : out) v /= mass;
  return out;
}

struct RadialTransform::Plans {
  std::size_t n;
  double* buffer_in;
  double* buffer_out;
  fftw_plan dst2;
  fftw_plan dst3;
  mutable std::mutex exec;  // plans share the scratch buffers

  explicit Plans(std::size_t size) : n(size) {
    std::lock_guard lock(planner_mutex());
    buffer_in = fftw_alloc_real(n);
    buffer_out = fftw_alloc_real(n);
    const int len = static_cast<int>(n);
    dst2 = fftw_plan_r2r_1d(len, buffer_in, buffer_out, FFTW_RODFT10, FFTW_ESTIMATE);
    dst3 = fftw_plan_r2r_1d(len, buffer_in, buffer_out, FFTW_RODFT01, FFTW_ESTIMATE);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(dst2);
    fftw_destroy_plan(dst3);
    fftw_free(buffer_in);
    fftw_free(buffer_out);
  }
};

RadialTransform::RadialTransform(const RadialGrid& grid)
    : grid_(grid), plans_(std::make_unique<Plans>(2 * grid.size())) {}
RadialTransform::~RadialTransform() = default;
RadialTransform::RadialTransform(RadialTransform&&) noexcept = default;
RadialTransform& RadialTransform::operator=(RadialTransform&&) noexcept = default;

double RadialTransform::wavenumber(std::size_t j) const {
  return static_cast<double>(j + 1) * kPi / (2.0 * grid_.r_max());
}

void RadialTransform::forward(std::span<const double> profile, std::span<double> spectrum) const {
  const std::size_t m = grid_.size();
  const std::size_t n = plans_->n;
  if (profile.size() != m || spectrum.size() != n) throw GridMismatch("transform size mismatch");
  const double dr = grid_.spacing();
  std::lock_guard lock(plans_->exec);
  for (std::size_t i = 0; i < m; ++i) plans_->buffer_in[i] = grid_.radius(i) * profile[i];
  std::fill(plans_->buffer_in + m, plans_->buffer_in + n, 0.0);
  fftw_execute(plans_->dst2);
  // RODFT10 returns 2 sum_i x_i sin(k_j r_i).
  for (std::size_t j = 0; j < n; ++j) spectrum[j] = 2.0 * kPi * dr * plans_->buffer_out[j] / wavenumber(j);
}

void RadialTransform::inverse(std::span<const double> spectrum, std::span<double> padded_profile) const {
  const std::size_t n = plans_->n;
  if (spectrum.size() != n || padded_profile.size() != n) throw GridMismatch("transform size mismatch");
  const double dr = grid_.spacing();
  std::lock_guard lock(plans_->exec);
  for (std::size_t j = 0; j < n; ++j) plans_->buffer_in[j] = spectrum[j] * wavenumber(j) / (2.0 * kPi * dr);
  fftw_execute(plans_->dst3);
  // RODFT01 inverts RODFT10 up to a factor 2n.
  const double norm = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (static_cast<double>(i) + 0.5) * dr;
    padded_profile[i] = plans_->buffer_out[i] * norm / r;
  }
}

void fold_to_grid(std::span<const double> padded, double target_mass, const RadialGrid& grid,
                  std::span<double> out) {
  const std::size_t m = grid.size();
  if (padded.size() < m || out.size() != m) throw GridMismatch("fold size mismatch");
  std::copy_n(padded.begin(), m, out.begin());
  const double deficit = target_mass - radial_mass(out, grid);
  out[m - 1] += deficit / grid.weight(m - 1);
}

Profile radial_convolution(std::span<const double> a, std::span<const double> b, const RadialGrid& grid) {
  if (a.size() != grid.size() || b.size() != grid.size())
    throw GridMismatch("convolution operands must live on the same grid");
  const RadialTransform transform(grid);
  const std::size_t n = transform.spectrum_size();
  std::vector<double> fa(n), fb(n), padded(n);
  transform.forward(a, fa);
  transform.forward(b, fb);
  for (std::size_t j = 0; j < n; ++j) fa[j] *= fb[j];
  transform.inverse(fa, padded);
  Profile out(grid.size());
  fold_to_grid(padded, radial_mass(a, grid) * radial_mass(b, grid), grid, out);
  return out;
}

}  // namespace spinswap::pde
