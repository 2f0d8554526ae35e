#pragma once

// Statistical reductions of simulation output: the singlet/triplet frequency
// ratio, xi(0) and xi(r) estimates, and the equality test between swap modes.

#include "spinswap/kmc.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace spinswap::est {

struct RatioEstimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n_events = 0;
  std::uint64_t singlet = 0;
  std::uint64_t triplet = 0;
};

struct BootstrapOptions {
  std::size_t resamples = 2000;
  std::uint64_t seed = 1;
};

RatioEstimate nu_ratio(std::uint64_t singlet, std::uint64_t triplet);
// nu_S / nu_T over all encounter classes with a delta-method 95% interval.
// Throws NoTripletEvents.
RatioEstimate nu_ratio(const kmc::RecombinationTally& tally);
// Percentile interval from binomial resampling of the singlet count.
RatioEstimate nu_ratio_bootstrap(const kmc::RecombinationTally& tally, const BootstrapOptions& options);

// Inverse of (1 + 3 xi) / (3 - 3 xi). Throws DomainError for ratio < 0.
double xi0_from_ratio(double ratio);

// Event-weighted mean xi of the meeting pairs. Throws InsufficientEvents
// on an empty tally.
double xi_hat0(const kmc::RecombinationTally& tally);

struct ModeComparison {
  double p_exact = 0.0;
  double p_reset = 0.0;
  std::uint64_t n_exact = 0;
  std::uint64_t n_reset = 0;
  double z = 0.0;
  double p_value = 1.0;
  double alpha = 0.01;
  bool pass = true;
};

inline constexpr std::uint64_t kMinComparisonEvents = 10000;
inline constexpr double kComparisonAlpha = 0.01;

// Pooled two-proportion z-test on the singlet fractions, two-sided.
ModeComparison two_proportion_test(std::uint64_t singlet_a, std::uint64_t n_a, std::uint64_t singlet_b,
                                   std::uint64_t n_b, double alpha = kComparisonAlpha);
// Throws InsufficientEvents when either tally has fewer than 10^4 events.
ModeComparison compare_modes(const kmc::RecombinationTally& exact, const kmc::RecombinationTally& reset,
                             double alpha = kComparisonAlpha);

struct XiBin {
  double r_low = 0.0;
  double r_high = 0.0;
  std::uint64_t combinations = 0;  // all +- combinations in the bin
  std::uint64_t correlated = 0;    // registry pairs in the bin
  std::optional<double> xi;        // empty when no combination fell in the bin
  double std_error = 0.0;
};

// Pools snapshots into a binned xi(r): sum of (-1/3)^n over registry pairs
// divided by the number of all +- combinations at that separation.
class PairStateAccumulator {
 public:
  PairStateAccumulator(double r_max, std::size_t bins);

  void add(const kmc::PairSnapshot& snapshot);
  std::vector<XiBin> result() const;
  std::size_t snapshots() const { return snapshots_; }

 private:
  double r_max_;
  std::size_t bins_;
  std::vector<std::uint64_t> combinations_;
  std::vector<std::uint64_t> correlated_;
  std::vector<double> xi_sum_;
  std::vector<double> xi2_sum_;
  std::size_t snapshots_ = 0;
};

std::vector<XiBin> average_pair_state(const kmc::PairSnapshot& snapshot, double r_max, std::size_t bins);

}  // namespace spinswap::est
