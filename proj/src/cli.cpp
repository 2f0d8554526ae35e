#include "spinswap/cli.hpp"

#include "spinswap/errors.hpp"
#include "spinswap/pde_driver.hpp"
#include "spinswap/spin_algebra.hpp"
#include "spinswap/swap_calculus.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>

namespace spinswap::cli {

namespace {

using out::format_number;
using out::Json;

constexpr std::uint64_t kMaxSweepIndex = 8;
constexpr std::size_t kCancellationPairs = 1000;
constexpr std::size_t kSequenceLength = 12;
constexpr double kTolerance = 1e-12;
constexpr const char* kDefaultOutDir = "spinswap_out";
constexpr const char* kOutDirEnv = "SPINSWAP_OUT_DIR";

CheckResult closed_form_sweep() {
  CheckResult r{"closed-form swap equivalence (n,m <= 8)", true, 0, 0.0, kTolerance};
  for (std::uint64_t n = 0; n <= kMaxSweepIndex; ++n)
    for (std::uint64_t m = 0; m <= kMaxSweepIndex; ++m) {
      const auto a = spin::rho_n(n), b = spin::rho_n(m);
      const auto s = spin::swap_singlet_exact(a, b);
      const auto t = spin::swap_triplet_exact(a, b);
      r.max_error = std::max({r.max_error, s.state.frobenius_distance(spin::rho_n(n + m)),
                              t.state.frobenius_distance(spin::rho_n(n + m + 1))});
      r.cases += 2;
    }
  r.pass = r.max_error < r.tolerance;
  return r;
}

CheckResult universality_sweep(std::mt19937_64& rng) {
  CheckResult r{"meeting-pair singlet probability = 1/4", true, 0, 0.0, kTolerance};
  auto check = [&](const spin::SpinOperator& a, const spin::SpinOperator& b) {
    const auto s = spin::swap_singlet_exact(a, b);
    const auto t = spin::swap_triplet_exact(a, b);
    r.max_error = std::max({r.max_error, std::abs(s.probability - 0.25), std::abs(t.probability - 0.75)});
    ++r.cases;
  };
  for (std::uint64_t n = 0; n <= kMaxSweepIndex; ++n)
    for (std::uint64_t m = 0; m <= kMaxSweepIndex; ++m) check(spin::rho_n(n), spin::rho_n(m));
  std::uniform_real_distribution<double> xi(-1.0 / 3.0, 1.0);
  for (int k = 0; k < 100; ++k) check(spin::rho_xi(xi(rng)), spin::rho_xi(xi(rng)));
  r.pass = r.max_error < r.tolerance;
  return r;
}

CheckResult cancellation_check(std::mt19937_64& rng, bool inject_fault) {
  CheckResult r{"gain cancellation at x = -1/3 (1000 random pairs)", true, 0, 0.0, kTolerance};
  swap::SwapWeights weights;
  if (inject_fault) weights.triplet = 0.5;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] {
    std::vector<double> v(kSequenceLength);
    for (double& x : v) x = u(rng);
    return swap::IndexSequence(std::move(v));
  };
  for (std::size_t k = 0; k < kCancellationPairs; ++k) {
    const auto a = draw(), b = draw();
    const double scale = a.l1_norm() * b.l1_norm();
    const double residual = swap::cancellation_residual(a, b, swap::kCancellationPoint, weights);
    r.max_error = std::max(r.max_error, std::abs(residual) / scale);
    ++r.cases;
  }
  r.pass = r.max_error < r.tolerance;
  return r;
}

std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return kDefaultOutDir;
}

Json to_json(const est::RatioEstimate& r) {
  return {{"value", r.value}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high}, {"n_events", r.n_events}};
}

Json to_json(const ModeSummary& s) {
  return {{"mode", s.mode},
          {"events", s.events},
          {"singlet", s.singlet},
          {"triplet", s.triplet},
          {"cross_fraction", s.cross_fraction},
          {"nu_ratio", to_json(s.ratio)},
          {"xi_hat0", s.xi_hat0},
          {"ratio_from_xi_hat0", s.ratio_from_xi_hat0},
          {"ratio_consistent", s.ratio_consistent}};
}

Json to_json(const est::ModeComparison& c) {
  return {{"p_exact", c.p_exact}, {"p_reset", c.p_reset}, {"n_exact", c.n_exact}, {"n_reset", c.n_reset},
          {"z", c.z},             {"p_value", c.p_value}, {"alpha", c.alpha},     {"pass", c.pass}};
}

std::string opt_cell(const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : ""; }

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::size_t workers = 0;
  std::string out_dir;
  bool json = false;
};

config::KmcRunConfig kmc_config(const config::AppConfig& app, const CommonFlags& flags) {
  config::KmcRunConfig cfg = app.require_kmc();
  if (flags.seed) cfg.sim.seed = *flags.seed;
  if (flags.replicas) cfg.replicas = *flags.replicas;
  if (cfg.replicas == 0) throw ConfigError("replicas must be at least 1");
  return cfg;
}

Json config_snapshot(const config::AppConfig& app, const Json& section, const char* key) {
  return Json{{"units", out::to_json(app.units)}, {key, section}};
}

void print_summary(const ModeSummary& s) {
  std::printf("%-16s events=%llu  S=%llu  T=%llu  cross=%.3f\n", s.mode.c_str(),
              static_cast<unsigned long long>(s.events), static_cast<unsigned long long>(s.singlet),
              static_cast<unsigned long long>(s.triplet), s.cross_fraction);
  std::printf("%-16s nu_S/nu_T = %.5f  [%.5f, %.5f]  xi(0) = %.5f  from xi(0): %.5f (%s)\n", "", s.ratio.value,
              s.ratio.ci_low, s.ratio.ci_high, s.xi_hat0, s.ratio_from_xi_hat0,
              s.ratio_consistent ? "consistent" : "outside interval");
}

int cmd_verify(const VerifyOptions& options, bool json) {
  const auto checks = run_verify(options);
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;
  if (json) {
    Json doc = {{"pass", all}, {"checks", Json::array()}};
    for (const auto& c : checks)
      doc["checks"].push_back({{"name", c.name},
                               {"pass", c.pass},
                               {"cases", c.cases},
                               {"max_error", c.max_error},
                               {"tolerance", c.tolerance}});
    std::cout << doc.dump(2) << "\n";
  } else {
    std::printf("%-52s %8s %12s %10s  %s\n", "check", "cases", "max error", "tolerance", "result");
    for (const auto& c : checks)
      std::printf("%-52s %8zu %12.3e %10.1e  %s\n", c.name.c_str(), c.cases, c.max_error, c.tolerance,
                  c.pass ? "PASS" : "FAIL");
    std::printf("%s\n", all ? "all checks passed" : "verification FAILED");
  }
  return all ? 0 : 1;
}

int cmd_pde(const CommonFlags& flags) {
  const std::string started = out::utc_timestamp();
  const auto app = config::load(flags.config_path);
  const pde::PdeRunConfig& cfg = app.require_pde();
  const pde::PdeReport report = pde::run_pde_comparison(cfg);

  out::ArtifactWriter writer(resolve_out_dir(flags.out_dir));
  out::Table series({"t [time]", "g_hierarchy [1/length^3]", "g_scalar [1/length^3]", "g_analytic [1/length^3]",
                     "xi0_hierarchy [1]", "xi0_scalar [1]"});
  for (const auto& s : report.series)
    series.row({format_number(s.t), format_number(s.g_hierarchy), format_number(s.g_scalar),
                format_number(s.g_analytic), format_number(s.xi0_hierarchy), format_number(s.xi0_scalar)});
  writer.write_table("pde_series.csv", series);

  out::Table profile({"r [length]", "xi_hierarchy [1]", "xi_scalar [1]"});
  for (std::size_t i = 0; i < report.grid.size(); ++i)
    profile.row({format_number(report.grid.radius(i)), format_number(report.final_xi_hierarchy[i]),
                 format_number(report.final_xi_scalar[i])});
  writer.write_table("pde_xi_profile.csv", profile);

  out::Table snaps({"t [time]", "r [length]", "xi_hierarchy [1]", "xi_scalar [1]"});
  for (const auto& s : report.snapshots)
    for (std::size_t i = 0; i < report.grid.size(); ++i)
      snaps.row({format_number(s.t), format_number(report.grid.radius(i)), format_number(s.xi_hierarchy[i]),
                 format_number(s.xi_scalar[i])});
  writer.write_table("pde_xi_snapshots.csv", snaps);

  out::Table checkpoints({"t [time]", "g_hierarchy [1/length^3]", "g_analytic [1/length^3]", "g_rel_error [1]",
                          "xi_rel_diff [1]", "xi0_hierarchy [1]", "xi0_scalar [1]", "truncation_bound [1]",
                          "tail_fraction [1]", "xi_in_range [bool]"});
  for (const auto& c : report.checkpoints)
    checkpoints.row({format_number(c.t), format_number(c.g_hierarchy), format_number(c.g_analytic),
                     format_number(c.g_relative_error), format_number(c.xi_relative_diff),
                     format_number(c.xi0_hierarchy), format_number(c.xi0_scalar), format_number(c.truncation_bound),
                     format_number(c.tail_fraction), c.xi_in_range ? "1" : "0"});
  writer.write_table("pde_checkpoints.csv", checkpoints);

  bool in_range = true;
  for (const auto& c : report.checkpoints) in_range = in_range && c.xi_in_range;
  const Json summary = {{"steps", report.steps},
                        {"dt", report.dt},
                        {"empty", report.empty},
                        {"max_xi_relative_diff", report.max_xi_relative_diff},
                        {"max_g_relative_error", report.max_g_relative_error},
                        {"xi_in_physical_range", in_range}};
  writer.write_json("pde_summary.json", summary);
  writer.write_manifest("pde", 0, config_snapshot(app, out::to_json(cfg), "pde"));
  writer.write_run_info(started, out::utc_timestamp(), 1);

  if (flags.json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::printf("pde: %zu steps of dt=%g, max xi difference %.3e, max g error %.3e\n", report.steps, report.dt,
                report.max_xi_relative_diff, report.max_g_relative_error);
    std::printf("outputs in %s\n", writer.dir().string().c_str());
  }
  return 0;
}

int cmd_kmc(const CommonFlags& flags, std::size_t bootstrap) {
  const std::string started = out::utc_timestamp();
  const auto app = config::load(flags.config_path);
  const config::KmcRunConfig cfg = kmc_config(app, flags);
  const std::size_t workers = flags.workers ? flags.workers : kmc::default_workers();
  const kmc::EnsembleResult ens = kmc::run_ensemble(cfg.sim, cfg.replicas, workers);

  out::ArtifactWriter writer(resolve_out_dir(flags.out_dir));
  const auto& tally = ens.merged;

  out::Table tally_table({"class [-]", "outcome [-]", "events [count]"});
  for (auto cls : {kmc::EncounterClass::CorrelatedPair, kmc::EncounterClass::Cross, kmc::EncounterClass::Partnerless})
    for (auto o : {kmc::Outcome::Singlet, kmc::Outcome::Triplet})
      tally_table.row({kmc::to_string(cls), kmc::to_string(o), std::to_string(tally.count(o, cls))});
  writer.write_table("kmc_tally.csv", tally_table);

  out::Table geminate({"meeting_index [-]", "singlet [count]", "triplet [count]"});
  for (std::size_t n = 0; n < tally.geminate_by_index().size(); ++n)
    geminate.row({std::to_string(n), std::to_string(tally.geminate_by_index()[n][0]),
                  std::to_string(tally.geminate_by_index()[n][1])});
  writer.write_table("kmc_geminate.csv", geminate);

  if (cfg.sim.sample_interval > 0.0) {
    out::Table series({"replica [-]", "t [time]", "plus_alive [count]", "minus_alive [count]",
                       "density [1/length^3]", "pairs [count]", "events [count]", "xi_hat0 [1]"});
    for (std::size_t k = 0; k < ens.replicas.size(); ++k)
      for (const auto& s : ens.replicas[k].series)
        series.row({std::to_string(k), format_number(s.t), std::to_string(s.plus_alive),
                    std::to_string(s.minus_alive), format_number(s.density), std::to_string(s.pairs),
                    std::to_string(s.events), format_number(s.xi_hat0)});
    writer.write_table("kmc_series.csv", series);
  }

  if (cfg.sim.record_events) {
    out::Table events({"replica [-]", "t [time]", "plus_id [-]", "minus_id [-]", "class [-]", "outcome [-]",
                       "meeting_index [-]", "plus_pair_index [-]", "minus_pair_index [-]", "created_index [-]",
                       "xi_meeting [1]"});
    for (std::size_t k = 0; k < ens.replicas.size(); ++k)
      for (const auto& e : ens.replicas[k].tally.log())
        events.row({std::to_string(k), format_number(e.t), std::to_string(e.plus), std::to_string(e.minus),
                    kmc::to_string(e.cls), kmc::to_string(e.outcome), opt_cell(e.meeting_index),
                    opt_cell(e.plus_pair_index), opt_cell(e.minus_pair_index), opt_cell(e.created_index),
                    format_number(e.xi_meeting)});
    writer.write_table("kmc_events.csv", events);
  }

  Json xi_profile = nullptr;
  if (cfg.sim.snapshot_time >= 0.0) {
    est::PairStateAccumulator acc(cfg.xi_r_max, cfg.xi_bins);
    for (const auto& r : ens.replicas)
      if (r.snapshot) acc.add(*r.snapshot);
    out::Table table({"r_low [length]", "r_high [length]", "combinations [count]", "correlated [count]",
                      "xi_hat [1]", "std_error [1]"});
    for (const auto& b : acc.result())
      table.row({format_number(b.r_low), format_number(b.r_high), std::to_string(b.combinations),
                 std::to_string(b.correlated), b.xi ? format_number(*b.xi) : "",
                 b.xi ? format_number(b.std_error) : ""});
    writer.write_table("kmc_xi_profile.csv", table);
    xi_profile = {{"snapshots", acc.snapshots()}, {"file", "kmc_xi_profile.csv"}};
  }

  Json summary = {{"replicas", cfg.replicas}, {"swap_mode", kmc::to_string(cfg.sim.swap_mode)}};
  std::uint64_t generated = 0, rejected = 0;
  for (const auto& r : ens.replicas) {
    generated += r.generated_pairs;
    rejected += r.rejected_encounters;
  }
  summary["generated_pairs"] = generated;
  summary["rejected_encounters"] = rejected;
  std::optional<ModeSummary> mode;
  if (tally.triplet() > 0) {
    mode = summarize(kmc::to_string(cfg.sim.swap_mode), tally);
    summary["estimates"] = to_json(*mode);
    if (bootstrap > 0) {
      const auto boot = est::nu_ratio_bootstrap(tally, {bootstrap, cfg.sim.seed});
      summary["nu_ratio_bootstrap"] = to_json(boot);
    }
    summary["xi0_from_ratio"] = est::xi0_from_ratio(mode->ratio.value);
  } else {
    summary["estimates"] = nullptr;
    summary["note"] = "no triplet events: ratio undefined";
  }
  summary["xi_profile"] = xi_profile;
  writer.write_json("kmc_summary.json", summary);
  writer.write_manifest("kmc", cfg.sim.seed, config_snapshot(app, out::to_json(cfg), "kmc"));
  writer.write_run_info(started, out::utc_timestamp(), workers);

  if (flags.json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    if (mode) print_summary(*mode);
    else std::printf("kmc: %llu events, no triplets\n", static_cast<unsigned long long>(tally.total()));
    std::printf("outputs in %s\n", writer.dir().string().c_str());
  }
  return 0;
}

int cmd_compare(const CommonFlags& flags) {
  const std::string started = out::utc_timestamp();
  const auto app = config::load(flags.config_path);
  const config::KmcRunConfig cfg = kmc_config(app, flags);
  const std::size_t workers = flags.workers ? flags.workers : kmc::default_workers();
  const CompareResult result = run_compare(cfg, workers);

  out::ArtifactWriter writer(resolve_out_dir(flags.out_dir));
  out::Table table({"mode [-]", "events [count]", "singlet [count]", "triplet [count]", "cross_fraction [1]",
                    "nu_ratio [1]", "ci_low [1]", "ci_high [1]", "xi_hat0 [1]"});
  for (const auto* s : {&result.exact, &result.reset})
    table.row({s->mode, std::to_string(s->events), std::to_string(s->singlet), std::to_string(s->triplet),
               format_number(s->cross_fraction), format_number(s->ratio.value), format_number(s->ratio.ci_low),
               format_number(s->ratio.ci_high), format_number(s->xi_hat0)});
  writer.write_table("compare.csv", table);
  const Json summary = {{"exact", to_json(result.exact)},
                        {"classical_reset", to_json(result.reset)},
                        {"test", to_json(result.test)},
                        {"verdict", result.test.pass ? "pass" : "fail"}};
  writer.write_json("compare_summary.json", summary);
  writer.write_manifest("compare", cfg.sim.seed, config_snapshot(app, out::to_json(cfg), "kmc"));
  writer.write_run_info(started, out::utc_timestamp(), workers);

  if (flags.json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    print_summary(result.exact);
    print_summary(result.reset);
    std::printf("two-proportion test: z = %.3f, p = %.4g, alpha = %.2g -> %s\n", result.test.z,
                result.test.p_value, result.test.alpha, result.test.pass ? "PASS" : "FAIL");
  }
  return result.test.pass ? 0 : 1;
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<CheckResult> checks;
  checks.push_back(closed_form_sweep());
  checks.push_back(universality_sweep(rng));
  checks.push_back(cancellation_check(rng, options.inject_fault));
  return checks;
}

ModeSummary summarize(const std::string& mode, const kmc::RecombinationTally& tally) {
  ModeSummary s;
  s.mode = mode;
  s.events = tally.total();
  s.singlet = tally.singlet();
  s.triplet = tally.triplet();
  s.cross_fraction = s.events ? static_cast<double>(tally.count_class(kmc::EncounterClass::Cross)) /
                                    static_cast<double>(s.events)
                              : 0.0;
  s.ratio = est::nu_ratio(tally);
  s.xi_hat0 = est::xi_hat0(tally);
  s.ratio_from_xi_hat0 = pde::nu_ratio_from_xi(s.xi_hat0);
  s.ratio_consistent = s.ratio.ci_low <= s.ratio_from_xi_hat0 && s.ratio_from_xi_hat0 <= s.ratio.ci_high;
  return s;
}

std::uint64_t reset_stream_seed(std::uint64_t seed) {
  // Arbitrary fixed salt separating the two ensembles' streams.
  return kmc::replica_seed(seed, 0x5eed5eed5eedULL);
}

CompareResult run_compare(const config::KmcRunConfig& cfg, std::size_t workers) {
  kmc::SimConfig exact = cfg.sim;
  exact.swap_mode = kmc::SwapMode::Exact;
  exact.record_events = false;
  kmc::SimConfig reset = exact;
  reset.swap_mode = kmc::SwapMode::ClassicalReset;
  reset.seed = reset_stream_seed(cfg.sim.seed);
  const auto ex = kmc::run_ensemble(exact, cfg.replicas, workers);
  const auto re = kmc::run_ensemble(reset, cfg.replicas, workers);
  CompareResult r;
  r.exact = summarize("exact", ex.merged);
  r.reset = summarize("classical-reset", re.merged);
  r.test = est::compare_modes(ex.merged, re.merged);
  return r;
}

int main(int argc, char** argv) {
  CLI::App app{"spinswap: spin-correlation swapping in radical-ion recombination"};
  app.set_version_flag("--version", SPINSWAP_VERSION);
  app.require_subcommand(1);

  VerifyOptions verify_options;
  bool verify_json = false;
  auto* verify = app.add_subcommand("verify", "Run the algebraic self-checks");
  verify->add_flag("--json", verify_json, "Machine-readable output");
  verify->add_option("--seed", verify_options.seed, "Seed of the random test cases");
  verify->add_flag("--inject-fault", verify_options.inject_fault,
                   "Use triplet weight 1/2 in the cancellation check (must fail)");

  CommonFlags flags;
  std::size_t bootstrap = 0;
  auto add_common = [&](CLI::App* sub, bool stochastic) {
    sub->add_option("--config", flags.config_path, "YAML configuration file")->required();
    sub->add_option("--out", flags.out_dir, std::string("Output directory (default: $") + kOutDirEnv + " or " +
                                                kDefaultOutDir + ")");
    sub->add_flag("--json", flags.json, "Print the summary as JSON");
    if (stochastic) {
      sub->add_option("--seed", flags.seed, "Override the configured seed");
      sub->add_option("--replicas", flags.replicas, "Override the configured replica count");
      sub->add_option("--workers", flags.workers, "Worker threads (default: available cores)");
    }
  };
  auto* pde_cmd = app.add_subcommand("pde", "Hierarchy and scalar xi solvers side by side");
  add_common(pde_cmd, false);
  auto* kmc_cmd = app.add_subcommand("kmc", "Stochastic simulation ensemble");
  add_common(kmc_cmd, true);
  kmc_cmd->add_option("--bootstrap", bootstrap, "Also report a bootstrap interval with this many resamples");
  auto* compare_cmd = app.add_subcommand("compare", "Exact vs classical-reset swap modes");
  add_common(compare_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*verify) return cmd_verify(verify_options, verify_json);
    if (*pde_cmd) return cmd_pde(flags);
    if (*kmc_cmd) return cmd_kmc(flags, bootstrap);
    if (*compare_cmd) return cmd_compare(flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const StabilityViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}

}  // namespace spinswap::cli
