#include "spinswap/errors.hpp"
#include "spinswap/swap_calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace swp = spinswap::swap;

namespace {

// Enumerates every (n, m) meeting and the two outcomes explicitly.
std::vector<double> gain_by_enumeration(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> gain(a.size() + b.size(), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n)
    for (std::size_t m = 0; m < b.size(); ++m) {
      gain[n + m] += 0.25 * a[n] * b[m];
      gain[n + m + 1] += 0.75 * a[n] * b[m];
    }
  return gain;
}

std::vector<double> random_sequence(std::mt19937_64& rng, std::size_t length) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(length);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(IndexSequence, ValidatesEntries) {
  EXPECT_THROW(swp::IndexSequence({1.0}), spinswap::LengthMismatch);
  EXPECT_THROW(swp::IndexSequence({1.0, -0.1}), spinswap::DomainError);
  const auto z = swp::IndexSequence::zeros(5);
  EXPECT_EQ(z.truncation(), 5u);
  EXPECT_EQ(z.l1_norm(), 0.0);
}

TEST(SwapGain, SingletPairsMeetingGiveQuarterSingletThreeQuartersTriplet) {
  const swp::IndexSequence a({1.0, 0.0, 0.0});
  const auto g = swp::swap_gain(a, a);
  EXPECT_DOUBLE_EQ(g[0], 0.25);
  EXPECT_DOUBLE_EQ(g[1], 0.75);
  EXPECT_DOUBLE_EQ(g[2], 0.0);
}

TEST(SwapGain, MatchesEnumerationOnRandomSequences) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto va = random_sequence(rng, 9), vb = random_sequence(rng, 9);
    const auto oracle = gain_by_enumeration(va, vb);
    const auto full = swp::swap_gain_full(swp::IndexSequence(va), swp::IndexSequence(vb));
    ASSERT_EQ(full.size(), oracle.size());
    for (std::size_t n = 0; n < oracle.size(); ++n) EXPECT_NEAR(full[n], oracle[n], 1e-14);
    const auto truncated = swp::swap_gain(swp::IndexSequence(va), swp::IndexSequence(vb));
    for (std::size_t n = 0; n < truncated.size(); ++n) EXPECT_NEAR(truncated[n], oracle[n], 1e-14);
  }
}

TEST(SwapGain, RejectsMismatchedTruncations) {
  EXPECT_THROW(swp::swap_gain(swp::IndexSequence::zeros(3), swp::IndexSequence::zeros(4)),
               spinswap::LengthMismatch);
}

TEST(SwapGain, FullGainConservesPairNumber) {
  std::mt19937_64 rng(22);
  const auto va = random_sequence(rng, 12), vb = random_sequence(rng, 12);
  const swp::IndexSequence a(va), b(vb);
  const auto full = swp::swap_gain_full(a, b);
  double total = 0.0;
  for (double x : full) total += x;
  EXPECT_NEAR(total, a.l1_norm() * b.l1_norm(), 1e-12);
}

TEST(XiWeightedSum, GeometricSeriesClosedForm) {
  // a_n = q^n gives sum_n (q x)^n = (1 - (q x)^(N+1)) / (1 - q x).
  const double q = 0.7, x = -1.0 / 3.0;
  std::vector<double> a(15);
  for (std::size_t n = 0; n < a.size(); ++n) a[n] = std::pow(q, static_cast<double>(n));
  const double qx = q * x;
  EXPECT_NEAR(swp::xi_weighted_sum(a, x), (1.0 - std::pow(qx, 15.0)) / (1.0 - qx), 1e-15);
  EXPECT_THROW(swp::xi_weighted_sum(a, 1.5), spinswap::DomainError);
}

TEST(Cancellation, VanishesAtMinusOneThird) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const swp::IndexSequence a(random_sequence(rng, 12)), b(random_sequence(rng, 12));
    EXPECT_LT(std::abs(swp::cancellation_residual(a, b)), 1e-12 * a.l1_norm() * b.l1_norm());
  }
}

TEST(Cancellation, ResidualFactorizesAwayFromTheCancellationPoint) {
  // sum_n x^n gain_n = (ws + wt x) A(x) B(x) for the untruncated gain.
  std::mt19937_64 rng(24);
  const auto va = random_sequence(rng, 10), vb = random_sequence(rng, 10);
  const swp::IndexSequence a(va), b(vb);
  for (double x : {-1.0, -0.5, 0.0, 0.2, 0.9}) {
    const double expected = (0.25 + 0.75 * x) * swp::xi_weighted_sum(a, x) * swp::xi_weighted_sum(b, x);
    EXPECT_NEAR(swp::cancellation_residual(a, b, x), expected, 1e-12);
  }
  EXPECT_GT(std::abs(swp::cancellation_residual(a, b, 0.0)), 1e-3);
}

TEST(Cancellation, WrongTripletWeightBreaksIt) {
  const swp::IndexSequence a({1.0, 0.5, 0.25}), b({0.3, 0.2, 0.1});
  const swp::SwapWeights faulty{0.25, 0.5};
  EXPECT_GT(std::abs(swp::cancellation_residual(a, b, swp::kCancellationPoint, faulty)), 1e-3);
}

TEST(TruncationLoss, ZeroWhenUpperHalfIsEmpty) {
  // Supports confined to n < N/2 - 1 never reach beyond N.
  const swp::IndexSequence a({1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(swp::truncation_loss(a, a), 0.0);
  const swp::IndexSequence top({0.0, 0.0, 0.0, 1.0});
  // gain_6 = 1/4, gain_7 = 3/4, both beyond N = 3.
  EXPECT_NEAR(swp::truncation_loss(top, top), 0.25 * std::pow(1.0 / 3.0, 6) + 0.75 * std::pow(1.0 / 3.0, 7), 1e-16);
}

TEST(TruncationLoss, BoundsTheTruncatedWeightedSum) {
  std::mt19937_64 rng(25);
  const swp::IndexSequence a(random_sequence(rng, 8)), b(random_sequence(rng, 8));
  const auto truncated = swp::swap_gain(a, b);
  EXPECT_LE(std::abs(swp::xi_weighted_sum(truncated, swp::kCancellationPoint)),
            swp::truncation_loss(a, b) * (1.0 + 1e-12));
}
