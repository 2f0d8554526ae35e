#include "spinswap/swap_calculus.hpp"

#include "spinswap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace spinswap::swap {

IndexSequence::IndexSequence(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw LengthMismatch("index sequence needs truncation N >= 1");
  for (std::size_t n = 0; n < values_.size(); ++n) {
    if (!(values_[n] >= 0.0))
      throw DomainError("index sequence entry " + std::to_string(n) + " is negative or NaN");
  }
}

IndexSequence IndexSequence::zeros(std::size_t truncation) {
  return IndexSequence(std::vector<double>(truncation + 1, 0.0));
}

double IndexSequence::l1_norm() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

void swap_gain_into(std::span<const double> a, std::span<const double> b, std::span<double> out,
                    const SwapWeights& weights) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t len = out.size();
  for (std::size_t m = 0; m < a.size() && m < len; ++m) {
    const double am = a[m];
    if (am == 0.0) continue;
    // singlet outcome: index m + j
    for (std::size_t j = 0; j < b.size() && m + j < len; ++j) out[m + j] += weights.singlet * am * b[j];
    // triplet outcome: index m + j + 1
    for (std::size_t j = 0; j < b.size() && m + j + 1 < len; ++j)
      out[m + j + 1] += weights.triplet * am * b[j];
  }
}

IndexSequence swap_gain(const IndexSequence& a, const IndexSequence& b, const SwapWeights& weights) {
  if (a.size() != b.size())
    throw LengthMismatch("sequences have truncations " + std::to_string(a.truncation()) + " and " +
                         std::to_string(b.truncation()));
  std::vector<double> out(a.size());
  swap_gain_into(a.values(), b.values(), out, weights);
  return IndexSequence(std::move(out));
}

std::vector<double> swap_gain_full(const IndexSequence& a, const IndexSequence& b, const SwapWeights& weights) {
  if (a.size() != b.size())
    throw LengthMismatch("sequences have truncations " + std::to_string(a.truncation()) + " and " +
                         std::to_string(b.truncation()));
  std::vector<double> out(2 * a.truncation() + 2);
  swap_gain_into(a.values(), b.values(), out, weights);
  return out;
}

double xi_weighted_sum(std::span<const double> a, double x) {
  if (!(std::abs(x) <= 1.0)) throw DomainError("weighting point must satisfy |x| <= 1");
  // Horner from the top keeps the alternating sum well conditioned.
  double acc = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double truncation_loss(const IndexSequence& a, const IndexSequence& b, double x, const SwapWeights& weights) {
  const auto full = swap_gain_full(a, b, weights);
  double loss = 0.0;
  double power = std::pow(std::abs(x), static_cast<double>(a.size()));
  for (std::size_t n = a.size(); n < full.size(); ++n) {
    loss += power * full[n];
    power *= std::abs(x);
  }
  return loss;
}

double cancellation_residual(const IndexSequence& a, const IndexSequence& b, double x,
                             const SwapWeights& weights) {
  return xi_weighted_sum(swap_gain_full(a, b, weights), x);
}

}  // namespace spinswap::swap
