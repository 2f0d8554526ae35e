#include "spinswap/estimators.hpp"

#include "spinswap/errors.hpp"
#include "spinswap/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace spinswap::est {

namespace {

constexpr double kZ95 = 1.959963984540054;

}  // namespace

RatioEstimate nu_ratio(std::uint64_t singlet, std::uint64_t triplet) {
  if (triplet == 0) throw NoTripletEvents("ratio undefined without triplet events");
  const auto n = static_cast<double>(singlet + triplet);
  const double p = static_cast<double>(singlet) / n;
  RatioEstimate est;
  est.singlet = singlet;
  est.triplet = triplet;
  est.n_events = singlet + triplet;
  est.value = static_cast<double>(singlet) / static_cast<double>(triplet);
  // d/dp [p / (1 - p)] = 1 / (1 - p)^2
  const double se = std::sqrt(p * (1.0 - p) / n) / ((1.0 - p) * (1.0 - p));
  est.ci_low = std::max(0.0, est.value - kZ95 * se);
  est.ci_high = est.value + kZ95 * se;
  return est;
}

RatioEstimate nu_ratio(const kmc::RecombinationTally& tally) { return nu_ratio(tally.singlet(), tally.triplet()); }

RatioEstimate nu_ratio_bootstrap(const kmc::RecombinationTally& tally, const BootstrapOptions& options) {
  RatioEstimate est = nu_ratio(tally);
  if (options.resamples < 2) throw DomainError("bootstrap needs at least two resamples");
  std::mt19937_64 rng(options.seed);
  std::binomial_distribution<std::uint64_t> draw(est.n_events,
                                                 static_cast<double>(est.singlet) / static_cast<double>(est.n_events));
  std::vector<double> ratios;
  ratios.reserve(options.resamples);
  for (std::size_t b = 0; b < options.resamples; ++b) {
    const std::uint64_t s = draw(rng);
    const std::uint64_t t = est.n_events - s;
    ratios.push_back(t == 0 ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(s) / static_cast<double>(t));
  }
  std::sort(ratios.begin(), ratios.end());
  auto quantile = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(ratios.size() - 1)));
    return ratios[k];
  };
  est.ci_low = std::min(est.value, quantile(0.025));
  est.ci_high = std::max(est.value, quantile(0.975));
  return est;
}

double xi0_from_ratio(double ratio) {
  if (!(ratio >= 0.0)) throw DomainError("frequency ratio must be nonnegative");
  return (3.0 * ratio - 1.0) / (3.0 * ratio + 3.0);
}

double xi_hat0(const kmc::RecombinationTally& tally) {
  if (tally.total() == 0) throw InsufficientEvents("no recombination events");
  return tally.xi_sum() / static_cast<double>(tally.total());
}

ModeComparison two_proportion_test(std::uint64_t singlet_a, std::uint64_t n_a, std::uint64_t singlet_b,
                                   std::uint64_t n_b, double alpha) {
  if (n_a == 0 || n_b == 0) throw InsufficientEvents("two-proportion test needs events in both samples");
  ModeComparison cmp;
  cmp.n_exact = n_a;
  cmp.n_reset = n_b;
  cmp.alpha = alpha;
  const auto na = static_cast<double>(n_a);
  const auto nb = static_cast<double>(n_b);
  cmp.p_exact = static_cast<double>(singlet_a) / na;
  cmp.p_reset = static_cast<double>(singlet_b) / nb;
  const double pooled = static_cast<double>(singlet_a + singlet_b) / (na + nb);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  if (se > 0.0) {
    cmp.z = (cmp.p_exact - cmp.p_reset) / se;
    cmp.p_value = std::erfc(std::abs(cmp.z) / std::sqrt(2.0));
  } else {
    // Both samples all-singlet or all-triplet: the fractions coincide.
    cmp.z = 0.0;
    cmp.p_value = 1.0;
  }
  cmp.pass = cmp.p_value > alpha;
  return cmp;
}

ModeComparison compare_modes(const kmc::RecombinationTally& exact, const kmc::RecombinationTally& reset,
                             double alpha) {
  if (exact.total() < kMinComparisonEvents || reset.total() < kMinComparisonEvents)
    throw InsufficientEvents("mode comparison needs at least " + std::to_string(kMinComparisonEvents) +
                             " events per mode (got " + std::to_string(exact.total()) + " and " +
                             std::to_string(reset.total()) + ")");
  return two_proportion_test(exact.singlet(), exact.total(), reset.singlet(), reset.total(), alpha);
}

PairStateAccumulator::PairStateAccumulator(double r_max, std::size_t bins)
    : r_max_(r_max), bins_(bins), combinations_(bins, 0), correlated_(bins, 0), xi_sum_(bins, 0.0),
      xi2_sum_(bins, 0.0) {
  if (!(r_max > 0.0) || bins == 0) throw DomainError("binning needs r_max > 0 and at least one bin");
}

void PairStateAccumulator::add(const kmc::PairSnapshot& snapshot) {
  const double l = snapshot.box_length;
  const double width = r_max_ / static_cast<double>(bins_);
  auto bin_of = [&](const kmc::Vec3& a, const kmc::Vec3& b) -> std::optional<std::size_t> {
    const double r = std::sqrt(kmc::periodic_distance2(a, b, l));
    if (r >= r_max_) return std::nullopt;
    return std::min(bins_ - 1, static_cast<std::size_t>(r / width));
  };
  for (const auto& p : snapshot.plus_positions)
    for (const auto& m : snapshot.minus_positions)
      if (auto b = bin_of(p, m)) ++combinations_[*b];
  for (const auto& c : snapshot.correlated) {
    if (c.plus_slot >= snapshot.plus_positions.size() || c.minus_slot >= snapshot.minus_positions.size())
      throw RegistryCorrupt("snapshot pair refers to a missing radical");
    if (auto b = bin_of(snapshot.plus_positions[c.plus_slot], snapshot.minus_positions[c.minus_slot])) {
      const double xi = spin::werner_xi(c.index);
      ++correlated_[*b];
      xi_sum_[*b] += xi;
      xi2_sum_[*b] += xi * xi;
    }
  }
  ++snapshots_;
}

std::vector<XiBin> PairStateAccumulator::result() const {
  const double width = r_max_ / static_cast<double>(bins_);
  std::vector<XiBin> out(bins_);
  for (std::size_t b = 0; b < bins_; ++b) {
    XiBin& bin = out[b];
    bin.r_low = width * static_cast<double>(b);
    bin.r_high = width * static_cast<double>(b + 1);
    bin.combinations = combinations_[b];
    bin.correlated = correlated_[b];
    if (combinations_[b] == 0) continue;
    const auto d = static_cast<double>(combinations_[b]);
    bin.xi = xi_sum_[b] / d;
    // Per-combination values are xi or 0; the sample variance of their mean.
    const double mean_sq = xi2_sum_[b] / d;
    bin.std_error = std::sqrt(std::max(0.0, mean_sq - *bin.xi * *bin.xi) / d);
  }
  return out;
}

std::vector<XiBin> average_pair_state(const kmc::PairSnapshot& snapshot, double r_max, std::size_t bins) {
  PairStateAccumulator acc(r_max, bins);
  acc.add(snapshot);
  return acc.result();
}

}  // namespace spinswap::est
