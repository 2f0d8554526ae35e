#include "spinswap/kmc.hpp"

#include "spinswap/errors.hpp"
#include "spinswap/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spinswap::kmc {

namespace {

constexpr double kUncorrelatedSinglet = 0.25;

double cube(double x) { return x * x * x; }

std::uint64_t steps_for(double t_end, double dt) {
  return static_cast<std::uint64_t>(std::llround(t_end / dt));
}

}  // namespace

std::string to_string(SwapMode mode) { return mode == SwapMode::Exact ? "exact" : "classical-reset"; }

SwapMode parse_swap_mode(const std::string& name) {
  if (name == "exact") return SwapMode::Exact;
  if (name == "classical-reset") return SwapMode::ClassicalReset;
  throw ConfigError("unknown swap_mode '" + name + "' (expected exact or classical-reset)");
}

std::string to_string(EncounterClass cls) {
  switch (cls) {
    case EncounterClass::CorrelatedPair:
      return "correlated";
    case EncounterClass::Cross:
      return "cross";
    case EncounterClass::Partnerless:
      return "partnerless";
  }
  return "?";
}

std::string to_string(Outcome outcome) { return outcome == Outcome::Singlet ? "singlet" : "triplet"; }

void SimConfig::validate() const {
  if (!(box_length > 0.0)) throw ConfigError("box_length must be positive");
  if (!(reaction_radius > 0.0)) throw ConfigError("reaction_radius must be positive");
  if (!(reaction_radius < box_length / 4.0)) throw ConfigError("reaction_radius must be below box_length / 4");
  if (!(reaction_probability > 0.0 && reaction_probability <= 1.0))
    throw ConfigError("reaction_probability must lie in (0, 1]");
  if (!(d_plus >= 0.0) || !(d_minus >= 0.0)) throw ConfigError("diffusion coefficients must be nonnegative");
  if (!(gamma0 >= 0.0) || !(gamma1 >= 0.0)) throw ConfigError("generation rates must be nonnegative");
  if (!(form_factor.scale > 0.0)) throw ConfigError("form_factor scale must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  if (!(sample_interval >= 0.0)) throw ConfigError("sample_interval must be nonnegative");
  const double rms = std::sqrt(6.0 * std::max(d_plus, d_minus) * dt);
  if (!(rms < reaction_radius / 2.0))
    throw ConfigError("dt too large: RMS step " + std::to_string(rms) + " must stay below reaction_radius / 2");
  if (reset_singlet_bias && !(*reset_singlet_bias >= 0.0 && *reset_singlet_bias <= 1.0))
    throw ConfigError("reset_singlet_bias must lie in [0, 1]");
}

RadicalId Population::add(Charge charge, const Vec3& position) {
  const RadicalId id = radicals_.size();
  radicals_.push_back({id, charge, wrap(position, box_length_), true});
  alive_.push_back(id);
  return id;
}

const Radical& Population::at(RadicalId id) const {
  if (id >= radicals_.size()) throw DeadRadical("unknown radical id " + std::to_string(id));
  return radicals_[id];
}

Radical& Population::at(RadicalId id) {
  if (id >= radicals_.size()) throw DeadRadical("unknown radical id " + std::to_string(id));
  return radicals_[id];
}

void Population::kill(RadicalId id) {
  Radical& r = at(id);
  if (!r.alive) throw DeadRadical("radical " + std::to_string(id) + " is already dead");
  r.alive = false;
  dirty_ = true;
}

std::size_t Population::alive_count(Charge charge) const {
  return static_cast<std::size_t>(std::count_if(alive_.begin(), alive_.end(), [&](RadicalId id) {
    return radicals_[id].alive && radicals_[id].charge == charge;
  }));
}

void Population::compact() {
  if (!dirty_) return;
  std::erase_if(alive_, [this](RadicalId id) { return !radicals_[id].alive; });
  dirty_ = false;
}

Vec3 wrap(const Vec3& position, double box_length) {
  Vec3 out{};
  for (std::size_t a = 0; a < 3; ++a) {
    double x = position[a] - box_length * std::floor(position[a] / box_length);
    if (x >= box_length) x = 0.0;
    out[a] = x;
  }
  return out;
}

double periodic_distance2(const Vec3& a, const Vec3& b, double box_length) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    double d = a[k] - b[k];
    d -= box_length * std::round(d / box_length);
    d2 += d * d;
  }
  return d2;
}

void CorrelationRegistry::ensure(RadicalId id) {
  if (id >= links_.size()) links_.resize(id + 1, Link{kNone, 0});
}

void CorrelationRegistry::add_pair(RadicalId plus, RadicalId minus, std::uint64_t index) {
  ensure(std::max(plus, minus));
  if (plus == minus) throw RegistryCorrupt("a radical cannot pair with itself");
  if (links_[plus].partner != kNone || links_[minus].partner != kNone)
    throw RegistryCorrupt("radical already belongs to a correlated pair");
  links_[plus] = {minus, index};
  links_[minus] = {plus, index};
  ++pair_count_;
}

std::optional<CorrelationRegistry::Link> CorrelationRegistry::link(RadicalId id) const {
  if (id >= links_.size() || links_[id].partner == kNone) return std::nullopt;
  return links_[id];
}

std::optional<RadicalId> CorrelationRegistry::dissolve(RadicalId id) {
  const auto l = link(id);
  if (!l) return std::nullopt;
  links_[id].partner = kNone;
  links_[l->partner].partner = kNone;
  --pair_count_;
  return l->partner;
}

std::vector<PairRecord> CorrelationRegistry::pairs(const Population& population) const {
  std::vector<PairRecord> out;
  out.reserve(pair_count_);
  for (RadicalId id = 0; id < links_.size(); ++id) {
    if (links_[id].partner == kNone) continue;
    if (population.at(id).charge != Charge::Plus) continue;
    out.push_back({id, links_[id].partner, links_[id].index});
  }
  return out;
}

void CorrelationRegistry::check_consistency(const Population& population) const {
  std::size_t members = 0;
  for (RadicalId id = 0; id < links_.size(); ++id) {
    const Link& l = links_[id];
    if (l.partner == kNone) continue;
    ++members;
    const std::string tag = "radical " + std::to_string(id);
    if (l.partner >= links_.size()) throw RegistryCorrupt(tag + " links to an unknown id");
    const Link& back = links_[l.partner];
    if (back.partner != id || back.index != l.index) throw RegistryCorrupt(tag + " has an asymmetric link");
    if (!population.at(id).alive) throw RegistryCorrupt(tag + " is dead but still registered");
    if (population.at(id).charge == population.at(l.partner).charge)
      throw RegistryCorrupt(tag + " is paired with a radical of the same charge");
  }
  if (members != 2 * pair_count_) throw RegistryCorrupt("pair count does not match the links");
}

void RecombinationTally::record(const EventRecord& event) {
  ++counts_[static_cast<std::size_t>(event.outcome)][static_cast<std::size_t>(event.cls)];
  if (event.cls == EncounterClass::CorrelatedPair && event.meeting_index) {
    const auto n = static_cast<std::size_t>(*event.meeting_index);
    if (n >= geminate_by_index_.size()) geminate_by_index_.resize(n + 1, {0, 0});
    ++geminate_by_index_[n][static_cast<std::size_t>(event.outcome)];
  }
  xi_sum_ += event.xi_meeting;
  if (keep_log_) log_.push_back(event);
}

void RecombinationTally::merge(const RecombinationTally& other) {
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t c = 0; c < 3; ++c) counts_[o][c] += other.counts_[o][c];
  if (other.geminate_by_index_.size() > geminate_by_index_.size())
    geminate_by_index_.resize(other.geminate_by_index_.size(), {0, 0});
  for (std::size_t n = 0; n < other.geminate_by_index_.size(); ++n) {
    geminate_by_index_[n][0] += other.geminate_by_index_[n][0];
    geminate_by_index_[n][1] += other.geminate_by_index_[n][1];
  }
  xi_sum_ += other.xi_sum_;
  if (keep_log_) log_.insert(log_.end(), other.log_.begin(), other.log_.end());
}

std::uint64_t RecombinationTally::count(Outcome outcome, EncounterClass cls) const {
  return counts_[static_cast<std::size_t>(outcome)][static_cast<std::size_t>(cls)];
}

std::uint64_t RecombinationTally::count(Outcome outcome) const {
  const auto& row = counts_[static_cast<std::size_t>(outcome)];
  return row[0] + row[1] + row[2];
}

std::uint64_t RecombinationTally::count_class(EncounterClass cls) const {
  return count(Outcome::Singlet, cls) + count(Outcome::Triplet, cls);
}

Vec3 sample_separation(const pde::FormFactor& w, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 v{normal(rng), normal(rng), normal(rng)};
  if (w.kind == pde::FormFactorKind::Gaussian) {
    for (double& x : v) x *= w.scale;
    return v;
  }
  // exp(-r/b) in 3D: the radius follows Gamma(3, b).
  std::gamma_distribution<double> radius(3.0, w.scale);
  const double r = radius(rng);
  const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  for (double& x : v) x *= r / norm;
  return v;
}

void place_pair(Population& population, CorrelationRegistry& registry, const SimConfig& cfg, Rng& rng,
                bool partnerless) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double l = cfg.box_length;
  const Vec3 plus_pos{l * uniform(rng), l * uniform(rng), l * uniform(rng)};
  const Vec3 sep = sample_separation(cfg.form_factor, rng);
  const Vec3 minus_pos{plus_pos[0] + sep[0], plus_pos[1] + sep[1], plus_pos[2] + sep[2]};
  const double u = uniform(rng);
  const RadicalId plus = population.add(Charge::Plus, plus_pos);
  const RadicalId minus = population.add(Charge::Minus, minus_pos);
  if (partnerless) return;
  const double gamma = cfg.gamma_total();
  const std::uint64_t index = (gamma > 0.0 && u * gamma >= cfg.gamma0) ? 1 : 0;
  registry.add_pair(plus, minus, index);
}

SimState initialize(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  SimState state{Population(cfg.box_length), CorrelationRegistry{}};
  const bool partnerless = cfg.initial_registry == InitialRegistry::Partnerless;
  for (std::uint64_t k = 0; k < cfg.initial_pairs; ++k)
    place_pair(state.population, state.registry, cfg, rng, partnerless);
  return state;
}

void diffuse(Population& population, const SimConfig& cfg, double dt, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma_plus = std::sqrt(2.0 * cfg.d_plus * dt);
  const double sigma_minus = std::sqrt(2.0 * cfg.d_minus * dt);
  for (RadicalId id : population.alive()) {
    Radical& r = population.at(id);
    if (!r.alive) continue;
    const double sigma = r.charge == Charge::Plus ? sigma_plus : sigma_minus;
    if (sigma == 0.0) continue;
    Vec3 p = r.position;
    for (double& x : p) x += sigma * normal(rng);
    r.position = wrap(p, population.box_length());
  }
}

namespace {

std::vector<Encounter> greedy_match(std::vector<Encounter> candidates, std::size_t id_space) {
  std::sort(candidates.begin(), candidates.end(), [](const Encounter& a, const Encounter& b) {
    if (a.distance2 != b.distance2) return a.distance2 < b.distance2;
    if (a.plus != b.plus) return a.plus < b.plus;
    return a.minus < b.minus;
  });
  std::vector<Encounter> out;
  if (candidates.empty()) return out;
  std::vector<char> used(id_space, 0);
  for (const Encounter& e : candidates) {
    if (used[e.plus] || used[e.minus]) continue;
    used[e.plus] = used[e.minus] = 1;
    out.push_back(e);
  }
  return out;
}

}  // namespace

std::vector<Encounter> find_encounters(const Population& population, const SimConfig& cfg) {
  const double l = population.box_length();
  const double r2 = cfg.reaction_radius * cfg.reaction_radius;
  const auto cells = static_cast<long>(std::floor(l / cfg.reaction_radius));
  std::vector<Encounter> candidates;

  std::vector<RadicalId> plus, minus;
  for (RadicalId id : population.alive()) {
    const Radical& r = population.at(id);
    if (!r.alive) continue;
    (r.charge == Charge::Plus ? plus : minus).push_back(id);
  }

  if (cells < 3) {
    for (RadicalId p : plus)
      for (RadicalId m : minus) {
        const double d2 = periodic_distance2(population.at(p).position, population.at(m).position, l);
        if (d2 < r2) candidates.push_back({p, m, d2});
      }
    return greedy_match(std::move(candidates), population.total_created());
  }

  const double cell_size = l / static_cast<double>(cells);
  auto cell_coord = [&](double x) {
    auto c = static_cast<long>(x / cell_size);
    return std::clamp(c, 0L, cells - 1);
  };
  auto cell_of = [&](long cx, long cy, long cz) {
    auto w = [cells](long c) { return ((c % cells) + cells) % cells; };
    return static_cast<std::size_t>((w(cx) * cells + w(cy)) * cells + w(cz));
  };

  // Counting sort of the minus radicals into cells.
  const auto ncell = static_cast<std::size_t>(cells * cells * cells);
  std::vector<std::size_t> start(ncell + 1, 0);
  std::vector<std::size_t> minus_cell(minus.size());
  for (std::size_t k = 0; k < minus.size(); ++k) {
    const Vec3& p = population.at(minus[k]).position;
    minus_cell[k] = cell_of(cell_coord(p[0]), cell_coord(p[1]), cell_coord(p[2]));
    ++start[minus_cell[k] + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) start[c + 1] += start[c];
  std::vector<RadicalId> sorted(minus.size());
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t k = 0; k < minus.size(); ++k) sorted[fill[minus_cell[k]]++] = minus[k];
  }

  for (RadicalId p : plus) {
    const Vec3& pp = population.at(p).position;
    const long cx = cell_coord(pp[0]), cy = cell_coord(pp[1]), cz = cell_coord(pp[2]);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          const std::size_t c = cell_of(cx + dx, cy + dy, cz + dz);
          for (std::size_t k = start[c]; k < start[c + 1]; ++k) {
            const RadicalId m = sorted[k];
            const double d2 = periodic_distance2(pp, population.at(m).position, l);
            if (d2 < r2) candidates.push_back({p, m, d2});
          }
        }
  }
  return greedy_match(std::move(candidates), population.total_created());
}

EventRecord resolve_encounter(const Encounter& pair, Population& population, CorrelationRegistry& registry,
                              double u, double t, const SimConfig& cfg) {
  const Radical& plus = population.at(pair.plus);
  const Radical& minus = population.at(pair.minus);
  if (!plus.alive || !minus.alive) throw DeadRadical("encounter involves a dead radical");
  if (plus.charge != Charge::Plus || minus.charge != Charge::Minus)
    throw RegistryCorrupt("encounter must join a + and a - radical");

  EventRecord event;
  event.t = t;
  event.plus = pair.plus;
  event.minus = pair.minus;

  const auto plus_link = registry.link(pair.plus);
  const auto minus_link = registry.link(pair.minus);
  const bool biased = cfg.swap_mode == SwapMode::ClassicalReset && cfg.reset_singlet_bias.has_value();
  const double uncorrelated_singlet = biased ? *cfg.reset_singlet_bias : kUncorrelatedSinglet;

  if (plus_link && plus_link->partner == pair.minus) {
    const auto state = spin::WernerState::from_index(plus_link->index);
    event.cls = EncounterClass::CorrelatedPair;
    event.meeting_index = plus_link->index;
    event.xi_meeting = state.xi();
    event.outcome = u < spin::singlet_probability(state) ? Outcome::Singlet : Outcome::Triplet;
    registry.dissolve(pair.plus);
  } else if (plus_link && minus_link) {
    // Meeting pair is maximally mixed: xi = 0.
    event.cls = EncounterClass::Cross;
    event.plus_pair_index = plus_link->index;
    event.minus_pair_index = minus_link->index;
    event.outcome = u < uncorrelated_singlet ? Outcome::Singlet : Outcome::Triplet;
    const RadicalId orphan_minus = plus_link->partner;
    const RadicalId orphan_plus = minus_link->partner;
    registry.dissolve(pair.plus);
    registry.dissolve(pair.minus);
    if (cfg.swap_mode == SwapMode::Exact) {
      const auto created = event.outcome == Outcome::Singlet
                               ? spin::swap_singlet_closed(plus_link->index, minus_link->index)
                               : spin::swap_triplet_closed(plus_link->index, minus_link->index);
      event.created_index = *created.index();
      registry.add_pair(orphan_plus, orphan_minus, *created.index());
    }
  } else {
    event.cls = EncounterClass::Partnerless;
    event.outcome = u < uncorrelated_singlet ? Outcome::Singlet : Outcome::Triplet;
    registry.dissolve(pair.plus);
    registry.dissolve(pair.minus);
  }

  population.kill(pair.plus);
  population.kill(pair.minus);
  return event;
}

std::uint64_t generate(Population& population, CorrelationRegistry& registry, const SimConfig& cfg, double dt,
                       Rng& rng) {
  const double mean = cfg.gamma_total() * cube(cfg.box_length) * dt;
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> count(mean);
  const std::uint64_t k = count(rng);
  for (std::uint64_t i = 0; i < k; ++i) place_pair(population, registry, cfg, rng);
  return k;
}

PairSnapshot take_snapshot(const SimState& state, double t) {
  const Population& pop = state.population;
  PairSnapshot snap;
  snap.t = t;
  snap.box_length = pop.box_length();
  std::vector<std::size_t> slot(pop.total_created(), 0);
  for (RadicalId id : pop.alive()) {
    const Radical& r = pop.at(id);
    if (!r.alive) continue;
    auto& list = r.charge == Charge::Plus ? snap.plus_positions : snap.minus_positions;
    slot[id] = list.size();
    list.push_back(r.position);
  }
  for (const PairRecord& rec : state.registry.pairs(pop))
    snap.correlated.push_back({slot[rec.plus], slot[rec.minus], rec.index});
  return snap;
}

Simulation::Simulation(const SimConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed), state_{Population(cfg.box_length), {}} {
  cfg_.validate();
  result_.tally = RecombinationTally(cfg_.record_events);
  state_ = initialize(cfg_, rng_);
  if (cfg_.sample_interval > 0.0) sample();
}

void Simulation::sample() {
  const auto& pop = state_.population;
  const double volume = cube(cfg_.box_length);
  const auto& tally = result_.tally;
  const std::uint64_t plus = pop.alive_count(Charge::Plus);
  result_.series.push_back({t_, plus, pop.alive_count(Charge::Minus), static_cast<double>(plus) / volume,
                            state_.registry.pair_count(), tally.total(),
                            tally.total() > 0 ? tally.xi_sum() / static_cast<double>(tally.total()) : 0.0});
  next_sample_ += cfg_.sample_interval;
}

void Simulation::step() {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  diffuse(state_.population, cfg_, cfg_.dt, rng_);
  const double t_event = t_ + cfg_.dt;
  for (const Encounter& e : find_encounters(state_.population, cfg_)) {
    const double accept = uniform(rng_);
    if (accept >= cfg_.reaction_probability) {
      ++result_.rejected_encounters;
      continue;
    }
    const double u = uniform(rng_);
    result_.tally.record(resolve_encounter(e, state_.population, state_.registry, u, t_event, cfg_));
  }
  state_.population.compact();
  result_.generated_pairs += generate(state_.population, state_.registry, cfg_, cfg_.dt, rng_);
  ++step_;
  t_ = cfg_.dt * static_cast<double>(step_);
  ++result_.steps;
  if (cfg_.sample_interval > 0.0 && t_ >= next_sample_ - 1e-9 * cfg_.dt) sample();
  if (cfg_.snapshot_time >= 0.0 && !result_.snapshot && t_ >= cfg_.snapshot_time - 1e-9 * cfg_.dt)
    result_.snapshot = take_snapshot(state_, t_);
}

void Simulation::check_invariants() const {
  state_.registry.check_consistency(state_.population);
  if (state_.population.alive_count(Charge::Plus) != state_.population.alive_count(Charge::Minus))
    throw RegistryCorrupt("charge imbalance among living radicals");
}

RunResult Simulation::finish() && { return std::move(result_); }

RunResult run(const SimConfig& cfg) {
  Simulation sim(cfg);
  const std::uint64_t steps = steps_for(cfg.t_end, cfg.dt);
  for (std::uint64_t s = 0; s < steps; ++s) sim.step();
  return std::move(sim).finish();
}

double measure_rate_constant(const SimConfig& cfg, std::uint64_t radicals_per_sign, double duration) {
  SimConfig control = cfg;
  control.gamma0 = control.gamma1 = 0.0;
  control.validate();
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double l = control.box_length;
  SimState state{Population(l), {}};
  // Uniform outside contact with every opposite charge; overlapping starts
  // would react in the first step against almost no exposure.
  const double r2 = control.reaction_radius * control.reaction_radius;
  std::vector<Vec3> placed[2];
  for (std::uint64_t k = 0; k < 2 * radicals_per_sign; ++k) {
    const int sign = static_cast<int>(k % 2);
    Vec3 p{};
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw ConfigError("rate measurement: box too crowded for non-overlapping placement");
      p = {l * uniform(rng), l * uniform(rng), l * uniform(rng)};
      const auto& others = placed[1 - sign];
      if (std::none_of(others.begin(), others.end(),
                       [&](const Vec3& q) { return periodic_distance2(p, q, l) <= r2; }))
        break;
    }
    placed[sign].push_back(p);
    state.population.add(sign == 0 ? Charge::Plus : Charge::Minus, p);
  }
  const double volume = cube(l);
  double exposure = 0.0;  // integral of N+ N- / V dt
  std::uint64_t events = 0;
  const std::uint64_t steps = steps_for(duration, control.dt);
  for (std::uint64_t s = 0; s < steps; ++s) {
    const auto n = static_cast<double>(state.population.alive_count() / 2);
    exposure += n * n / volume * control.dt;
    diffuse(state.population, control, control.dt, rng);
    for (const Encounter& e : find_encounters(state.population, control)) {
      if (uniform(rng) >= control.reaction_probability) continue;
      resolve_encounter(e, state.population, state.registry, uniform(rng), 0.0, control);
      ++events;
    }
    state.population.compact();
  }
  if (exposure <= 0.0) throw ZeroDensity("no radicals in the rate measurement");
  return static_cast<double>(events) / exposure;
}

}  // namespace spinswap::kmc
