#pragma once

// Replica ensembles: independent seeded streams run on a worker pool and
// merged in replica-index order.

#include "spinswap/kmc.hpp"

#include <cstdint>
#include <vector>

namespace spinswap::kmc {

// Seed of replica `replica` derived from the base seed. Different base seeds
// or replica indices give unrelated streams.
std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica);

struct EnsembleResult {
  std::vector<RunResult> replicas;
  RecombinationTally merged;
};

// Runs `replicas` copies of `cfg` with seeds replica_seed(cfg.seed, k) on
// `workers` threads (0: hardware concurrency). Output is independent of the
// worker count.
EnsembleResult run_ensemble(const SimConfig& cfg, std::size_t replicas, std::size_t workers = 0);

std::size_t default_workers();

}  // namespace spinswap::kmc
