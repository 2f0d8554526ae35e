#pragma once

// Dense operator algebra on one to four spin-1/2 subsystems.
//
// Subsystems are labelled 1..k in Kronecker order: subsystem 1 is the most
// significant tensor slot. A four-spin operator therefore lives on
// (1,2,3,4) with the meeting pair {2,3} in the middle slots.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>

namespace spinswap::spin {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr int kMaxSpins = 4;
inline constexpr double kStateTolerance = 1e-12;
inline constexpr double kWernerTolerance = 1e-10;

class SpinOperator {
 public:
  // Throws DimensionOverflow unless 1 <= spins <= 4 and the matrix is
  // 2^spins square.
  SpinOperator(int spins, Matrix entries);

  int spin_count() const { return spins_; }
  Eigen::Index dimension() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }

  Complex trace() const { return entries_.trace(); }
  bool is_hermitian(double tol = kStateTolerance) const;
  // Hermitian, unit trace, eigenvalues >= -1e-10.
  bool is_state(double tol = kStateTolerance) const;
  // Ascending eigenvalues of the Hermitian part.
  Eigen::VectorXd eigenvalues() const;

  double frobenius_distance(const SpinOperator& other) const;

 private:
  int spins_;
  Matrix entries_;
};

// sigma_0 and the three Pauli matrices.
struct PauliBasis {
  static const Matrix& identity();
  static const Matrix& x();
  static const Matrix& y();
  static const Matrix& z();
  static std::array<Matrix, 3> axes() { return {x(), y(), z()}; }
};

// A member of the isotropic two-spin family
//   rho(xi) = (1/4) [ s0 (x) s0 - xi sum_k sk (x) sk ],  xi in [-1/3, 1].
// Index n corresponds to xi = (-1/3)^n; n = 0 is the singlet and n = 1 the
// isotropic triplet.
class WernerState {
 public:
  static WernerState from_index(std::uint64_t n);
  // Throws DomainError outside [-1/3, 1].
  static WernerState from_param(double xi);

  std::optional<std::uint64_t> index() const { return index_; }
  double xi() const { return xi_; }
  SpinOperator density() const;

 private:
  WernerState(std::optional<std::uint64_t> index, double xi) : index_(index), xi_(xi) {}

  std::optional<std::uint64_t> index_;
  double xi_;
};

double werner_xi(std::uint64_t n);

SpinOperator rho_n(std::uint64_t n);
SpinOperator rho_xi(double xi);

// Singlet projector on two spins (equal to rho_n(0)).
const Matrix& singlet_projector();

// Recovers xi from -Tr[rho (sx (x) sx)]. Throws NotWernerForm if the three
// axes disagree or rho has components outside the family.
double werner_param(const SpinOperator& rho);

SpinOperator tensor(const SpinOperator& a, const SpinOperator& b);

// Embeds a two-spin operator on subsystems `slots` (1-based, distinct) of a
// `spins`-spin register, identity elsewhere. Built by explicit index
// permutation, so the slots need not be adjacent.
Matrix embed_pair_operator(const Matrix& pair_op, int spins, std::array<int, 2> slots);

// Traces out every subsystem not listed in `keep` (1-based, strictly
// increasing). Throws BadSubsystemSet for empty, full, repeated or
// out-of-range sets.
SpinOperator partial_trace(const SpinOperator& op, std::span<const int> keep);

struct ConditionalState {
  SpinOperator state;  // post-measurement state of the outer pair {1,4}
  double probability;  // probability of the conditioning outcome
};

// Prepares rho_a on {1,2} and rho_b on {3,4}, conditions on singlet (or
// isotropic triplet) recombination of {2,3}, and returns the normalized
// state of {1,4}. Probabilities are normalized so singlet + triplet = 1.
// Throws ZeroProbability if the outcome probability is below 1e-14.
ConditionalState swap_singlet_exact(const SpinOperator& rho_a, const SpinOperator& rho_b);
ConditionalState swap_triplet_exact(const SpinOperator& rho_a, const SpinOperator& rho_b);

WernerState swap_singlet_closed(std::uint64_t n, std::uint64_t m);
WernerState swap_triplet_closed(std::uint64_t n, std::uint64_t m);

// Tr[P_singlet rho(xi)] = (1 + 3 xi) / 4.
double singlet_probability(const WernerState& state);

}  // namespace spinswap::spin
