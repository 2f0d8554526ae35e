#pragma once

// Sequence-level calculus of the swapping gain: the index convolution that
// creates new correlated pairs, and the generating-function evaluation at
// x = -1/3 under which the gain terms cancel.

#include <cstddef>
#include <span>
#include <vector>

namespace spinswap::swap {

// Outcome weights of a meeting between fragments of two different pairs.
// The meeting pair is maximally mixed, so singlet 1/4 and triplet 3/4.
struct SwapWeights {
  double singlet = 0.25;
  double triplet = 0.75;
};

inline constexpr double kCancellationPoint = -1.0 / 3.0;

// Nonnegative pair densities a_0..a_N indexed by Werner index, N >= 1.
class IndexSequence {
 public:
  explicit IndexSequence(std::vector<double> values);
  static IndexSequence zeros(std::size_t truncation);

  std::size_t truncation() const { return values_.size() - 1; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t n) const { return values_[n]; }
  double l1_norm() const;

 private:
  std::vector<double> values_;
};

// Raw kernel, no sign or length requirements:
//   out_n = ws * sum_{m<=n} a_m b_{n-m} + wt * sum_{m<=n-1} a_m b_{n-m-1}
// for n < out.size(). Contributions landing beyond out.size() are dropped.
// Also used per Fourier node by the hierarchy solver, where entries can be
// negative.
void swap_gain_into(std::span<const double> a, std::span<const double> b, std::span<double> out,
                    const SwapWeights& weights = {});

// Truncated gain on the common truncation N. Throws LengthMismatch.
IndexSequence swap_gain(const IndexSequence& a, const IndexSequence& b, const SwapWeights& weights = {});

// Untruncated gain, length 2N + 2.
std::vector<double> swap_gain_full(const IndexSequence& a, const IndexSequence& b,
                                   const SwapWeights& weights = {});

// sum_n x^n a_n. Throws DomainError if |x| > 1.
double xi_weighted_sum(std::span<const double> a, double x);
inline double xi_weighted_sum(const IndexSequence& a, double x) { return xi_weighted_sum(a.values(), x); }

// sum_{n>N} |x|^n gain_n: the weighted mass that swap_gain(a, b) discards.
double truncation_loss(const IndexSequence& a, const IndexSequence& b, double x = kCancellationPoint,
                       const SwapWeights& weights = {});

// Weighted sum at x of the full (untruncated) gain. At x = -1/3 with the
// default weights this is (1/4 - 1/4) A(-1/3) B(-1/3) = 0.
double cancellation_residual(const IndexSequence& a, const IndexSequence& b, double x = kCancellationPoint,
                             const SwapWeights& weights = {});

}  // namespace spinswap::swap
