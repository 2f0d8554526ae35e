#include "spinswap/kmc_ensemble.hpp"

#include "spinswap/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <random>
#include <thread>

namespace spinswap::kmc {

std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

EnsembleResult run_ensemble(const SimConfig& cfg, std::size_t replicas, std::size_t workers) {
  if (replicas == 0) throw ConfigError("replicas must be at least 1");
  cfg.validate();
  if (workers == 0) workers = default_workers();
  workers = std::min(workers, replicas);

  std::vector<std::optional<RunResult>> slots(replicas);
  std::vector<std::exception_ptr> errors(replicas);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < replicas; k = next++) {
      try {
        SimConfig local = cfg;
        local.seed = replica_seed(cfg.seed, k);
        slots[k] = run(local);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  EnsembleResult out{{}, RecombinationTally(cfg.record_events)};
  out.replicas.reserve(replicas);
  for (auto& slot : slots) {
    out.merged.merge(slot->tally);
    out.replicas.push_back(std::move(*slot));
  }
  return out;
}

}  // namespace spinswap::kmc
