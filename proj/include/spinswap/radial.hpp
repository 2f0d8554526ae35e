#pragma once

// Cell-centred radial grid for spherically symmetric profiles and the
// order-zero spherical transform used to convolve them.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spinswap::pde {

using Profile = std::vector<double>;

// Shells [i dr, (i+1) dr), i < M, with nodes at r_i = (i + 1/2) dr.
class RadialGrid {
 public:
  static constexpr std::size_t kMinShells = 16;

  RadialGrid(double r_max, std::size_t shells);

  double r_max() const { return r_max_; }
  std::size_t size() const { return shells_; }
  double spacing() const { return dr_; }
  double radius(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dr_; }
  // Midpoint quadrature weight 4 pi r_i^2 dr. Used consistently for masses,
  // the finite-volume Laplacian and the spherical transform.
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  // Area of the outer face of shell i (at (i+1) dr).
  double outer_face_area(std::size_t i) const;

  bool operator==(const RadialGrid& other) const { return r_max_ == other.r_max_ && shells_ == other.shells_; }

 private:
  double r_max_;
  std::size_t shells_;
  double dr_;
  std::vector<double> weights_;
};

// integral f d^3r over the grid.
double radial_mass(std::span<const double> profile, const RadialGrid& grid);

enum class FormFactorKind { Exponential, Gaussian };

struct FormFactor {
  FormFactorKind kind = FormFactorKind::Exponential;
  double scale = 1.0;  // b for exp(-r/b)/(8 pi b^3), sigma for the Gaussian

  double density(double r) const;
  std::string name() const;
};

FormFactorKind parse_form_factor_kind(const std::string& name);

// Samples the form factor at the nodes and renormalizes to unit discrete mass.
Profile discretize(const FormFactor& w, const RadialGrid& grid);

// Spherical (order-zero Hankel) transform on a zero-padded grid of 2M nodes:
//   F(k_j) = (4 pi / k_j) sum_i r_i f_i sin(k_j r_i) dr,   k_j = (j+1) pi / (2 r_max),
// evaluated with a DST-II; the inverse is the matching DST-III. Padding keeps
// the product of two transforms free of wrap-around for supports <= r_max.
class RadialTransform {
 public:
  explicit RadialTransform(const RadialGrid& grid);
  ~RadialTransform();
  RadialTransform(const RadialTransform&) = delete;
  RadialTransform& operator=(const RadialTransform&) = delete;
  RadialTransform(RadialTransform&&) noexcept;
  RadialTransform& operator=(RadialTransform&&) noexcept;

  const RadialGrid& grid() const { return grid_; }
  std::size_t spectrum_size() const { return 2 * grid_.size(); }
  double wavenumber(std::size_t j) const;

  // profile: M values; spectrum: 2M values.
  void forward(std::span<const double> profile, std::span<double> spectrum) const;
  // spectrum: 2M values; profile: the full padded result, 2M values on
  // nodes (i + 1/2) dr.
  void inverse(std::span<const double> spectrum, std::span<double> padded_profile) const;

 private:
  struct Plans;
  RadialGrid grid_;
  std::unique_ptr<Plans> plans_;
};

// Clips a padded profile (2M nodes) to the grid, depositing the mass beyond
// r_max plus any quadrature deficit against `target_mass` into the outermost
// shell. The domain edge behaves as a reflecting wall, so convolution mass is
// conserved exactly. The operation is linear in (padded, target_mass).
void fold_to_grid(std::span<const double> padded, double target_mass, const RadialGrid& grid,
                  std::span<double> out);

// 3D convolution of two spherically symmetric profiles via the spherical
// transform, folded back onto the grid (mass-conserving).
// Throws GridMismatch if the profile lengths differ from the grid.
Profile radial_convolution(std::span<const double> a, std::span<const double> b, const RadialGrid& grid);

}  // namespace spinswap::pde
