#pragma once

// Stochastic many-particle simulator. Radical ions of both signs diffuse in a
// periodic cube and recombine on contact. The spin outcome of each encounter
// is drawn from the correlation registry, and cross-recombination swaps the
// correlation onto the two orphaned partners.

#include "spinswap/radial.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spinswap::kmc {

using RadicalId = std::uint64_t;
using Rng = std::mt19937_64;
using Vec3 = std::array<double, 3>;

enum class Charge : std::uint8_t { Plus, Minus };

enum class SwapMode { Exact, ClassicalReset };
enum class InitialRegistry { Paired, Partnerless };

std::string to_string(SwapMode mode);
SwapMode parse_swap_mode(const std::string& name);

struct Radical {
  RadicalId id = 0;
  Charge charge = Charge::Plus;
  Vec3 position{};
  bool alive = true;
};

struct SimConfig {
  double box_length = 20.0;
  std::uint64_t initial_pairs = 0;
  double reaction_radius = 1.0;
  double reaction_probability = 1.0;
  double d_plus = 1.0;
  double d_minus = 1.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  pde::FormFactor form_factor{};
  double dt = 0.01;
  double t_end = 1.0;
  std::uint64_t seed = 1;
  SwapMode swap_mode = SwapMode::Exact;
  InitialRegistry initial_registry = InitialRegistry::Paired;
  // Time-series sampling interval; 0 disables sampling.
  double sample_interval = 0.0;
  bool record_events = false;
  // Time at which a registry snapshot feeds the binned xi estimate (< 0: none).
  double snapshot_time = -1.0;
  // Sensitivity hook: in classical-reset mode, overrides the singlet
  // probability of non-geminate encounters.
  std::optional<double> reset_singlet_bias;

  double gamma_total() const { return gamma0 + gamma1; }
  // Throws ConfigError.
  void validate() const;
};

// Dense id -> radical storage plus the list of living ids.
class Population {
 public:
  explicit Population(double box_length) : box_length_(box_length) {}

  RadicalId add(Charge charge, const Vec3& position);
  const Radical& at(RadicalId id) const;
  Radical& at(RadicalId id);
  bool contains(RadicalId id) const { return id < radicals_.size(); }
  void kill(RadicalId id);

  double box_length() const { return box_length_; }
  std::span<const RadicalId> alive() const { return alive_; }
  std::size_t alive_count() const { return alive_.size(); }
  std::size_t alive_count(Charge charge) const;
  std::size_t total_created() const { return radicals_.size(); }
  // Drops dead ids from the living list (stable order).
  void compact();

 private:
  double box_length_;
  std::vector<Radical> radicals_;
  std::vector<RadicalId> alive_;
  bool dirty_ = false;
};

Vec3 wrap(const Vec3& position, double box_length);
double periodic_distance2(const Vec3& a, const Vec3& b, double box_length);

struct PairRecord {
  RadicalId plus;
  RadicalId minus;
  std::uint64_t index;
};

// Which living radicals form correlated pairs, and each pair's Werner index.
// Radicals without a record are partnerless.
class CorrelationRegistry {
 public:
  struct Link {
    RadicalId partner;
    std::uint64_t index;
  };

  void add_pair(RadicalId plus, RadicalId minus, std::uint64_t index);
  std::optional<Link> link(RadicalId id) const;
  bool is_partnerless(RadicalId id) const { return !link(id).has_value(); }
  // Removes the record containing `id`; returns the partner it had.
  std::optional<RadicalId> dissolve(RadicalId id);
  std::size_t pair_count() const { return pair_count_; }
  // All records ordered by plus id.
  std::vector<PairRecord> pairs(const Population& population) const;

  // Throws RegistryCorrupt on dead members, double membership, broken
  // symmetry or same-charge pairs.
  void check_consistency(const Population& population) const;

 private:
  static constexpr RadicalId kNone = ~RadicalId{0};
  void ensure(RadicalId id);
  std::vector<Link> links_;
  std::size_t pair_count_ = 0;
};

enum class EncounterClass : std::uint8_t { CorrelatedPair = 0, Cross = 1, Partnerless = 2 };
enum class Outcome : std::uint8_t { Singlet = 0, Triplet = 1 };

std::string to_string(EncounterClass cls);
std::string to_string(Outcome outcome);

struct EventRecord {
  double t = 0.0;
  RadicalId plus = 0;
  RadicalId minus = 0;
  EncounterClass cls = EncounterClass::Partnerless;
  Outcome outcome = Outcome::Singlet;
  // Index of the meeting pair (class a only).
  std::optional<std::uint64_t> meeting_index;
  // Indices of the pairs the + and - belonged to (class b only).
  std::optional<std::uint64_t> plus_pair_index;
  std::optional<std::uint64_t> minus_pair_index;
  // Index of the pair formed by the orphans (class b, exact mode).
  std::optional<std::uint64_t> created_index;
  // xi of the meeting pair: (-1/3)^n for class a, 0 otherwise.
  double xi_meeting = 0.0;
};

class RecombinationTally {
 public:
  explicit RecombinationTally(bool keep_log = false) : keep_log_(keep_log) {}

  void record(const EventRecord& event);
  // Counts add; logs concatenate. Merging in a fixed order is deterministic.
  void merge(const RecombinationTally& other);

  std::uint64_t count(Outcome outcome, EncounterClass cls) const;
  std::uint64_t count(Outcome outcome) const;
  std::uint64_t count_class(EncounterClass cls) const;
  std::uint64_t singlet() const { return count(Outcome::Singlet); }
  std::uint64_t triplet() const { return count(Outcome::Triplet); }
  std::uint64_t total() const { return singlet() + triplet(); }
  // Sum of xi_meeting over all events, for the event-weighted xi(0).
  double xi_sum() const { return xi_sum_; }
  // Class-(a) counts per meeting index: [n] -> {singlet, triplet}.
  const std::vector<std::array<std::uint64_t, 2>>& geminate_by_index() const { return geminate_by_index_; }

  bool keeps_log() const { return keep_log_; }
  const std::vector<EventRecord>& log() const { return log_; }

 private:
  bool keep_log_;
  std::array<std::array<std::uint64_t, 3>, 2> counts_{};
  std::vector<std::array<std::uint64_t, 2>> geminate_by_index_;
  double xi_sum_ = 0.0;
  std::vector<EventRecord> log_;
};

struct Encounter {
  RadicalId plus;
  RadicalId minus;
  double distance2;
};

// Draws a pair separation vector from the form factor.
Vec3 sample_separation(const pde::FormFactor& w, Rng& rng);

// Places one geminate pair: + uniform in the box, - displaced by a vector
// drawn from w. Registered with n = 0 with probability gamma0 / gamma_total
// (n = 0 when both rates vanish), else n = 1, unless `partnerless`.
void place_pair(Population& population, CorrelationRegistry& registry, const SimConfig& cfg, Rng& rng,
                bool partnerless = false);

struct SimState {
  Population population;
  CorrelationRegistry registry;
};

SimState initialize(const SimConfig& cfg, Rng& rng);

// Isotropic Gaussian step with variance 2 D dt per axis, wrapped.
void diffuse(Population& population, const SimConfig& cfg, double dt, Rng& rng);

// All +/- pairs closer than the reaction radius (cell lists), matched greedily
// closest-first with ties broken by (plus id, minus id); each radical appears
// at most once. Sorted in matching order.
std::vector<Encounter> find_encounters(const Population& population, const SimConfig& cfg);

// Classifies and resolves one accepted encounter. Both radicals die; swap
// bookkeeping is applied to the registry. `u` is the outcome uniform in
// [0, 1): the outcome is singlet iff u < p_singlet, so runs that differ only
// in swap mode consume identical random streams.
EventRecord resolve_encounter(const Encounter& pair, Population& population, CorrelationRegistry& registry,
                              double u, double t, const SimConfig& cfg);

// Adds Poisson(gamma_total L^3 dt) pairs.
std::uint64_t generate(Population& population, CorrelationRegistry& registry, const SimConfig& cfg, double dt,
                       Rng& rng);

struct TimeSample {
  double t;
  std::uint64_t plus_alive;
  std::uint64_t minus_alive;
  double density;  // living radicals of one sign per volume
  std::uint64_t pairs;
  std::uint64_t events;
  double xi_hat0;  // event-weighted xi(0) so far
};

// Positions of the living radicals and the registry pairs among them, as
// consumed by the average-pair-state estimator.
struct PairSnapshot {
  struct Correlated {
    std::size_t plus_slot;
    std::size_t minus_slot;
    std::uint64_t index;
  };
  double t = 0.0;
  double box_length = 0.0;
  std::vector<Vec3> plus_positions;
  std::vector<Vec3> minus_positions;
  std::vector<Correlated> correlated;
};

PairSnapshot take_snapshot(const SimState& state, double t);

struct RunResult {
  RecombinationTally tally;
  std::vector<TimeSample> series;
  std::optional<PairSnapshot> snapshot;
  std::uint64_t steps = 0;
  std::uint64_t generated_pairs = 0;
  std::uint64_t rejected_encounters = 0;
};

// One replica: diffuse -> find_encounters -> resolve -> generate, until
// t_end. Deterministic given cfg.seed.
class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg);

  void step();
  double time() const { return t_; }
  const SimState& state() const { return state_; }
  const RecombinationTally& tally() const { return result_.tally; }
  RunResult finish() &&;
  // Checks registry consistency and charge balance; throws RegistryCorrupt.
  void check_invariants() const;

 private:
  void sample();

  SimConfig cfg_;
  Rng rng_;
  SimState state_;
  RunResult result_;
  double t_ = 0.0;
  std::uint64_t step_ = 0;
  double next_sample_ = 0.0;
};

RunResult run(const SimConfig& cfg);

// Mass-action rate coefficient of the contact model measured on uncorrelated
// radicals placed uniformly outside contact, with no generation:
// kappa = events / (L^3 * integral g+ g- dt).
double measure_rate_constant(const SimConfig& cfg, std::uint64_t radicals_per_sign, double duration);

}  // namespace spinswap::kmc
