#include "spinswap/config.hpp"

#include "spinswap/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace spinswap::config {

namespace {

// Typed access to one mapping with the dotted path kept for error messages.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) throw ConfigError("'" + (path_.empty() ? "<root>" : path_) + "' must be a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  template <typename T>
  T get(const std::string& key) const {
    const YAML::Node value = node_[key];
    if (!value) throw ConfigError("missing key '" + join(key) + "'");
    try {
      return value.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("malformed value for '" + join(key) + "'");
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  Section child(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing key '" + join(key) + "'");
    return Section(node_[key], join(key));
  }

  const std::string& path() const { return path_; }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  YAML::Node node_;
  std::string path_;
};

pde::FormFactor read_form_factor(const Section& s) {
  const Section ff = s.child("form_factor");
  pde::FormFactor w;
  try {
    w.kind = pde::parse_form_factor_kind(ff.get<std::string>("kind"));
  } catch (const Error& e) {
    throw ConfigError(ff.path() + ".kind: " + e.what());
  }
  w.scale = ff.get<double>("scale");
  return w;
}

pde::PdeRunConfig read_pde(const Section& s) {
  pde::PdeRunConfig c;
  c.r_max = s.get<double>("r_max");
  c.shells = s.get<std::size_t>("shells");
  c.truncation = s.get<std::size_t>("truncation");
  c.kappa = s.get<double>("kappa");
  c.d_plus = s.get<double>("d_plus");
  c.d_minus = s.get<double>("d_minus");
  c.gamma0 = s.get<double>("gamma0");
  c.gamma1 = s.get<double>("gamma1");
  c.form_factor = read_form_factor(s);
  c.initial_density = s.get<double>("initial_density");
  c.dt = s.get<double>("dt");
  c.t_end = s.get<double>("t_end");
  c.checkpoints = s.get_or<std::size_t>("checkpoints", c.checkpoints);
  c.snapshots = s.get_or<std::size_t>("snapshots", c.snapshots);
  c.series_every = s.get_or<std::size_t>("series_every", c.series_every);
  return c;
}

KmcRunConfig read_kmc(const Section& s) {
  KmcRunConfig c;
  kmc::SimConfig& k = c.sim;
  k.box_length = s.get<double>("box_length");
  k.initial_pairs = s.get<std::uint64_t>("initial_pairs");
  k.reaction_radius = s.get<double>("reaction_radius");
  k.reaction_probability = s.get<double>("reaction_probability");
  k.d_plus = s.get<double>("d_plus");
  k.d_minus = s.get<double>("d_minus");
  k.gamma0 = s.get<double>("gamma0");
  k.gamma1 = s.get<double>("gamma1");
  k.form_factor = read_form_factor(s);
  k.dt = s.get<double>("dt");
  k.t_end = s.get<double>("t_end");
  k.seed = s.get<std::uint64_t>("seed");
  try {
    k.swap_mode = kmc::parse_swap_mode(s.get_or<std::string>("swap_mode", "exact"));
  } catch (const ConfigError& e) {
    throw ConfigError(s.path() + ".swap_mode: " + e.what());
  }
  const auto registry = s.get_or<std::string>("initial_registry", "paired");
  if (registry == "paired")
    k.initial_registry = kmc::InitialRegistry::Paired;
  else if (registry == "partnerless")
    k.initial_registry = kmc::InitialRegistry::Partnerless;
  else
    throw ConfigError(s.path() + ".initial_registry: expected paired or partnerless");
  k.sample_interval = s.get_or<double>("sample_interval", 0.0);
  k.record_events = s.get_or<bool>("record_events", false);
  k.snapshot_time = s.get_or<double>("snapshot_time", -1.0);
  if (s.has("reset_singlet_bias")) k.reset_singlet_bias = s.get<double>("reset_singlet_bias");
  c.replicas = s.get_or<std::size_t>("replicas", c.replicas);
  c.xi_r_max = s.get_or<double>("xi_r_max", c.xi_r_max);
  c.xi_bins = s.get_or<std::size_t>("xi_bins", c.xi_bins);
  if (c.replicas == 0) throw ConfigError(s.path() + ".replicas must be at least 1");
  k.validate();
  return c;
}

}  // namespace

const pde::PdeRunConfig& AppConfig::require_pde() const {
  if (!pde) throw ConfigError("missing section 'pde'");
  return *pde;
}

const KmcRunConfig& AppConfig::require_kmc() const {
  if (!kmc) throw ConfigError("missing section 'kmc'");
  return *kmc;
}

AppConfig parse(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("unreadable YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError("configuration must be a mapping");
  const Section top(root, "");
  AppConfig cfg;
  const Section units = top.child("units");
  cfg.units.length = units.get<std::string>("length");
  cfg.units.time = units.get<std::string>("time");
  if (top.has("pde")) cfg.pde = read_pde(top.child("pde"));
  if (top.has("kmc")) cfg.kmc = read_kmc(top.child("kmc"));
  return cfg;
}

AppConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

}  // namespace spinswap::config
