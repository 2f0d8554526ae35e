#pragma once

// Command-line front end: verify | pde | kmc | compare.

#include "spinswap/config.hpp"
#include "spinswap/estimators.hpp"
#include "spinswap/kmc_ensemble.hpp"
#include "spinswap/output.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spinswap::cli {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::size_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  // Replaces the triplet weight 3/4 by 1/2 in the cancellation check.
  bool inject_fault = false;
};

std::vector<CheckResult> run_verify(const VerifyOptions& options);

struct ModeSummary {
  std::string mode;
  std::uint64_t events = 0;
  std::uint64_t singlet = 0;
  std::uint64_t triplet = 0;
  double cross_fraction = 0.0;
  est::RatioEstimate ratio;
  double xi_hat0 = 0.0;
  double ratio_from_xi_hat0 = 0.0;  // (1 + 3 xi) / (3 - 3 xi)
  bool ratio_consistent = false;    // prediction inside the 95% interval
};

ModeSummary summarize(const std::string& mode, const kmc::RecombinationTally& tally);

struct CompareResult {
  ModeSummary exact;
  ModeSummary reset;
  est::ModeComparison test;
};

// Seeds of the classical-reset ensemble are drawn from a separate stream so
// the two samples are independent, as the two-proportion test assumes.
std::uint64_t reset_stream_seed(std::uint64_t seed);

// Runs the exact and classical-reset ensembles of `cfg` and compares them.
CompareResult run_compare(const config::KmcRunConfig& cfg, std::size_t workers);

// Entry point of the executable. Returns the process exit status:
// 0 success, 1 failed check or verdict, 2 usage or configuration error,
// 3 runtime error.
int main(int argc, char** argv);

}  // namespace spinswap::cli
