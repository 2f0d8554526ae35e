#pragma once

// Output artifacts: comma-separated tables whose header names each column
// with its unit, JSON summaries, and a manifest of SHA-256 checksums.

#include "spinswap/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spinswap::out {

using Json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes);

// Shortest text that round-trips the double.
std::string format_number(double value);

class Table {
 public:
  // Column labels carry units, e.g. "t [time]" or "xi [1]".
  explicit Table(std::vector<std::string> columns);

  Table& row(std::vector<std::string> cells);
  std::string csv() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct FileEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes;
};

// Writes files under one directory and remembers their checksums.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write_text(const std::string& name, const std::string& content);
  void write_table(const std::string& name, const Table& table);
  void write_json(const std::string& name, const Json& doc);
  const std::vector<FileEntry>& files() const { return files_; }

  // manifest.json: command, tool version, seed, config snapshot and the
  // checksum of every file written so far. Carries no wall-clock data, so
  // identical runs give identical manifests.
  void write_manifest(const std::string& command, std::uint64_t seed, const Json& config_snapshot);
  // run_info.json: wall-clock timestamps and worker count (not checksummed).
  void write_run_info(const std::string& started, const std::string& finished, std::size_t workers);

 private:
  std::filesystem::path dir_;
  std::vector<FileEntry> files_;
};

Json to_json(const config::Units& units);
Json to_json(const pde::PdeRunConfig& cfg);
Json to_json(const config::KmcRunConfig& cfg);

// UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace spinswap::out
