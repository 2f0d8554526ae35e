#include "spinswap/output.hpp"

#include "spinswap/errors.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>

namespace spinswap::out {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

Table& Table::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw LengthMismatch("table row has " + std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(columns_.size()));
  rows_.push_back(std::move(cells));
  return *this;
}

std::string Table::csv() const {
  std::string text;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text.push_back(',');
      text += cells[i];
    }
    text.push_back('\n');
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return text;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

void ArtifactWriter::write_text(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  outf << content;
  if (!outf) throw ConfigError("cannot write '" + path.string() + "'");
  files_.push_back({name, sha256_hex(content), content.size()});
}

void ArtifactWriter::write_table(const std::string& name, const Table& table) { write_text(name, table.csv()); }

void ArtifactWriter::write_json(const std::string& name, const Json& doc) { write_text(name, doc.dump(2) + "\n"); }

void ArtifactWriter::write_manifest(const std::string& command, std::uint64_t seed, const Json& config_snapshot) {
  Json doc;
  doc["tool"] = "spinswap";
  doc["version"] = SPINSWAP_VERSION;
  doc["command"] = command;
  doc["seed"] = seed;
  doc["config"] = config_snapshot;
  Json files = Json::array();
  for (const auto& f : files_) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  doc["files"] = files;
  doc["run_info"] = "run_info.json";
  const std::string text = doc.dump(2) + "\n";
  std::ofstream outf(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  outf << text;
  if (!outf) throw ConfigError("cannot write manifest");
}

void ArtifactWriter::write_run_info(const std::string& started, const std::string& finished, std::size_t workers) {
  Json doc{{"started", started}, {"finished", finished}, {"workers", workers}};
  std::ofstream outf(dir_ / "run_info.json", std::ios::binary | std::ios::trunc);
  outf << doc.dump(2) << "\n";
}

Json to_json(const config::Units& units) { return {{"length", units.length}, {"time", units.time}}; }

namespace {

Json to_json(const pde::FormFactor& w) { return {{"kind", w.name()}, {"scale", w.scale}}; }

}  // namespace

Json to_json(const pde::PdeRunConfig& c) {
  return {{"r_max", c.r_max},         {"shells", c.shells},
          {"truncation", c.truncation}, {"kappa", c.kappa},
          {"d_plus", c.d_plus},       {"d_minus", c.d_minus},
          {"gamma0", c.gamma0},       {"gamma1", c.gamma1},
          {"form_factor", to_json(c.form_factor)},
          {"initial_density", c.initial_density},
          {"dt", c.dt},               {"t_end", c.t_end},
          {"checkpoints", c.checkpoints}, {"snapshots", c.snapshots},
          {"series_every", c.series_every}};
}

Json to_json(const config::KmcRunConfig& c) {
  const kmc::SimConfig& k = c.sim;
  Json doc = {{"box_length", k.box_length},
              {"initial_pairs", k.initial_pairs},
              {"reaction_radius", k.reaction_radius},
              {"reaction_probability", k.reaction_probability},
              {"d_plus", k.d_plus},
              {"d_minus", k.d_minus},
              {"gamma0", k.gamma0},
              {"gamma1", k.gamma1},
              {"form_factor", to_json(k.form_factor)},
              {"dt", k.dt},
              {"t_end", k.t_end},
              {"seed", k.seed},
              {"swap_mode", kmc::to_string(k.swap_mode)},
              {"initial_registry", k.initial_registry == kmc::InitialRegistry::Paired ? "paired" : "partnerless"},
              {"sample_interval", k.sample_interval},
              {"record_events", k.record_events},
              {"snapshot_time", k.snapshot_time},
              {"replicas", c.replicas},
              {"xi_r_max", c.xi_r_max},
              {"xi_bins", c.xi_bins}};
  if (k.reset_singlet_bias) doc["reset_singlet_bias"] = *k.reset_singlet_bias;
  return doc;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace spinswap::out
