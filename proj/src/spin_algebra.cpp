#include "spinswap/spin_algebra.hpp"

#include "spinswap/errors.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace spinswap::spin {

namespace {

constexpr double kMinProbability = 1e-14;

Matrix make_2x2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Bit of subsystem `s` (1-based) inside a basis index of a `spins` register.
int subsystem_bit(Eigen::Index index, int spins, int s) {
  return static_cast<int>((index >> (spins - s)) & 1);
}

Matrix sum_sigma_sigma() {
  Matrix acc = Matrix::Zero(4, 4);
  for (const auto& s : PauliBasis::axes()) acc += Eigen::kroneckerProduct(s, s).eval();
  return acc;
}

}  // namespace

SpinOperator::SpinOperator(int spins, Matrix entries) : spins_(spins), entries_(std::move(entries)) {
  if (spins < 1 || spins > kMaxSpins)
    throw DimensionOverflow("spin count " + std::to_string(spins) + " outside [1, 4]");
  const Eigen::Index dim = Eigen::Index{1} << spins;
  if (entries_.rows() != dim || entries_.cols() != dim)
    throw DimensionOverflow("matrix is " + std::to_string(entries_.rows()) + "x" +
                            std::to_string(entries_.cols()) + ", expected " + std::to_string(dim) +
                            "x" + std::to_string(dim));
}

bool SpinOperator::is_hermitian(double tol) const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::VectorXd SpinOperator::eigenvalues() const {
  const Matrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

bool SpinOperator::is_state(double tol) const {
  if (!is_hermitian(tol)) return false;
  if (std::abs(trace() - Complex{1.0, 0.0}) > tol) return false;
  return eigenvalues().minCoeff() >= -1e-10;
}

double SpinOperator::frobenius_distance(const SpinOperator& other) const {
  if (other.dimension() != dimension())
    throw DimensionOverflow("Frobenius distance between operators of different size");
  return (entries_ - other.entries_).norm();
}

const Matrix& PauliBasis::identity() {
  static const Matrix m = make_2x2(1.0, 0.0, 0.0, 1.0);
  return m;
}
const Matrix& PauliBasis::x() {
  static const Matrix m = make_2x2(0.0, 1.0, 1.0, 0.0);
  return m;
}
const Matrix& PauliBasis::y() {
  static const Matrix m = make_2x2(0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0);
  return m;
}
const Matrix& PauliBasis::z() {
  static const Matrix m = make_2x2(1.0, 0.0, 0.0, -1.0);
  return m;
}

double werner_xi(std::uint64_t n) {
  // (-1/3)^n underflows to zero long before n overflows.
  const double magnitude = std::pow(1.0 / 3.0, static_cast<double>(n));
  return (n % 2 == 0) ? magnitude : -magnitude;
}

WernerState WernerState::from_index(std::uint64_t n) { return WernerState(n, werner_xi(n)); }

WernerState WernerState::from_param(double xi) {
  if (!(xi >= -1.0 / 3.0 - kWernerTolerance && xi <= 1.0 + kWernerTolerance))
    throw DomainError("Werner parameter " + std::to_string(xi) + " outside [-1/3, 1]");
  return WernerState(std::nullopt, xi);
}

SpinOperator WernerState::density() const { return rho_xi(xi_); }

SpinOperator rho_xi(double xi) {
  static const Matrix kIdentity4 = Matrix::Identity(4, 4);
  static const Matrix kSigmaSigma = sum_sigma_sigma();
  return SpinOperator(2, 0.25 * (kIdentity4 - xi * kSigmaSigma));
}

SpinOperator rho_n(std::uint64_t n) { return rho_xi(werner_xi(n)); }

const Matrix& singlet_projector() {
  static const Matrix p = rho_xi(1.0).matrix();
  return p;
}

double werner_param(const SpinOperator& rho) {
  if (rho.spin_count() != 2) throw NotWernerForm("operator does not act on two spins");
  const auto axes = PauliBasis::axes();
  std::array<double, 3> per_axis{};
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix corr = Eigen::kroneckerProduct(axes[k], axes[k]).eval();
    per_axis[k] = -(rho.matrix() * corr).trace().real();
  }
  const double xi = per_axis[0];
  for (std::size_t k = 1; k < 3; ++k) {
    if (std::abs(per_axis[k] - xi) > kWernerTolerance)
      throw NotWernerForm("axis correlations disagree: " + std::to_string(per_axis[0]) + ", " +
                          std::to_string(per_axis[1]) + ", " + std::to_string(per_axis[2]));
  }
  const double off_family = rho.frobenius_distance(rho_xi(xi));
  if (off_family > kWernerTolerance)
    throw NotWernerForm("components outside the isotropic family, norm " + std::to_string(off_family));
  return xi;
}

SpinOperator tensor(const SpinOperator& a, const SpinOperator& b) {
  const int spins = a.spin_count() + b.spin_count();
  if (spins > kMaxSpins)
    throw DimensionOverflow("tensor product would span " + std::to_string(spins) + " spins");
  return SpinOperator(spins, Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

Matrix embed_pair_operator(const Matrix& pair_op, int spins, std::array<int, 2> slots) {
  if (pair_op.rows() != 4 || pair_op.cols() != 4)
    throw DimensionOverflow("pair operator must be 4x4");
  if (spins < 2 || spins > kMaxSpins) throw DimensionOverflow("register must hold 2..4 spins");
  if (slots[0] == slots[1] || slots[0] < 1 || slots[1] < 1 || slots[0] > spins || slots[1] > spins)
    throw BadSubsystemSet("pair slots must be distinct and within the register");

  const Eigen::Index dim = Eigen::Index{1} << spins;
  Eigen::Index other_mask = dim - 1;
  for (int s : slots) other_mask &= ~(Eigen::Index{1} << (spins - s));

  Matrix out = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::Index pi = 2 * subsystem_bit(i, spins, slots[0]) + subsystem_bit(i, spins, slots[1]);
    for (Eigen::Index j = 0; j < dim; ++j) {
      if ((i & other_mask) != (j & other_mask)) continue;
      const Eigen::Index pj = 2 * subsystem_bit(j, spins, slots[0]) + subsystem_bit(j, spins, slots[1]);
      out(i, j) = pair_op(pi, pj);
    }
  }
  return out;
}

SpinOperator partial_trace(const SpinOperator& op, std::span<const int> keep) {
  const int spins = op.spin_count();
  if (keep.empty() || static_cast<int>(keep.size()) >= spins)
    throw BadSubsystemSet("must keep a nonempty proper subset of the subsystems");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 1 || keep[i] > spins) throw BadSubsystemSet("subsystem label out of range");
    if (i > 0 && keep[i] <= keep[i - 1]) throw BadSubsystemSet("subsystem labels must be strictly increasing");
  }
  std::vector<int> traced;
  for (int s = 1; s <= spins; ++s)
    if (std::find(keep.begin(), keep.end(), s) == keep.end()) traced.push_back(s);

  const int kept_count = static_cast<int>(keep.size());
  const int traced_count = static_cast<int>(traced.size());

  // Scatter the bits of a reduced index back into a full register index.
  auto compose = [spins](Eigen::Index bits, std::span<const int> labels) {
    Eigen::Index full = 0;
    const int count = static_cast<int>(labels.size());
    for (int q = 0; q < count; ++q) {
      const Eigen::Index bit = (bits >> (count - 1 - q)) & 1;
      full |= bit << (spins - labels[q]);
    }
    return full;
  };

  const Eigen::Index out_dim = Eigen::Index{1} << kept_count;
  const Eigen::Index traced_dim = Eigen::Index{1} << traced_count;
  Matrix out = Matrix::Zero(out_dim, out_dim);
  for (Eigen::Index a = 0; a < out_dim; ++a) {
    const Eigen::Index fa = compose(a, keep);
    for (Eigen::Index b = 0; b < out_dim; ++b) {
      const Eigen::Index fb = compose(b, keep);
      Complex acc{0.0, 0.0};
      for (Eigen::Index t = 0; t < traced_dim; ++t) {
        const Eigen::Index ft = compose(t, traced);
        acc += op.matrix()(fa | ft, fb | ft);
      }
      out(a, b) = acc;
    }
  }
  return SpinOperator(kept_count, std::move(out));
}

namespace {

ConditionalState condition_meeting_pair(const SpinOperator& rho_a, const SpinOperator& rho_b,
                                        const Matrix& meeting_effect, const char* outcome) {
  if (rho_a.spin_count() != 2 || rho_b.spin_count() != 2)
    throw DimensionOverflow("swapping acts on two two-spin states");
  const SpinOperator pre = tensor(rho_a, rho_b);
  const Matrix effect = embed_pair_operator(meeting_effect, 4, {2, 3});
  const SpinOperator conditioned(4, effect * pre.matrix());

  const double probability = conditioned.trace().real();
  if (probability < kMinProbability)
    throw ZeroProbability(std::string(outcome) + " outcome has probability " + std::to_string(probability));

  constexpr std::array<int, 2> kOuterPair{1, 4};
  const SpinOperator reduced = partial_trace(conditioned, kOuterPair);
  return {SpinOperator(2, reduced.matrix() / probability), probability};
}

}  // namespace

ConditionalState swap_singlet_exact(const SpinOperator& rho_a, const SpinOperator& rho_b) {
  return condition_meeting_pair(rho_a, rho_b, singlet_projector(), "singlet");
}

ConditionalState swap_triplet_exact(const SpinOperator& rho_a, const SpinOperator& rho_b) {
  // Isotropic triplet effect s0 (x) s0 - rho^(0); its trace against a
  // normalized state is already the triplet probability.
  const Matrix triplet = Matrix::Identity(4, 4) - singlet_projector();
  return condition_meeting_pair(rho_a, rho_b, triplet, "triplet");
}

WernerState swap_singlet_closed(std::uint64_t n, std::uint64_t m) { return WernerState::from_index(n + m); }

WernerState swap_triplet_closed(std::uint64_t n, std::uint64_t m) {
  return WernerState::from_index(n + m + 1);
}

double singlet_probability(const WernerState& state) { return (1.0 + 3.0 * state.xi()) / 4.0; }

}  // namespace spinswap::spin
