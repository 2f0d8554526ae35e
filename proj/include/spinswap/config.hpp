#pragma once

// Run configuration read from a YAML file with three sections: `units`
// (declared simulation units), `pde` and `kmc`. A run needs only the section
// of its own subcommand.

#include "spinswap/kmc.hpp"
#include "spinswap/pde_driver.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace spinswap::config {

struct Units {
  std::string length;
  std::string time;
};

struct KmcRunConfig {
  kmc::SimConfig sim;
  std::size_t replicas = 1;
  // Binning of the xi(r) estimate built from the registry snapshots.
  double xi_r_max = 8.0;
  std::size_t xi_bins = 16;
};

struct AppConfig {
  Units units;
  std::optional<pde::PdeRunConfig> pde;
  std::optional<KmcRunConfig> kmc;

  // Throw ConfigError naming the missing section.
  const pde::PdeRunConfig& require_pde() const;
  const KmcRunConfig& require_kmc() const;
};

// Throws ConfigError with the dotted path of a missing or malformed key.
AppConfig parse(const std::string& yaml_text);
AppConfig load(const std::filesystem::path& path);

}  // namespace spinswap::config
