#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mextract/value.hpp"

namespace mextract {

std::string_view tool_version();

/// Provenance written next to every command output.
struct RunManifest {
  std::string command;
  /// Effective options after merging the config file with flags.
  Json config = Json::object();
  /// input path -> hex SHA-256 of its bytes.
  std::map<std::string, std::string> input_hashes;
  std::optional<std::string> template_hash;
  std::optional<std::uint64_t> seed;
  std::string version{tool_version()};
  std::string started_at;
  std::string finished_at;
  /// paper_id -> attempts used, for extraction runs.
  std::map<std::string, int> attempts;

  void add_input(const std::filesystem::path& path);
  void start();
  void finish();
};

/// Current UTC time as ISO-8601 with second precision.
std::string utc_timestamp();

Json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

/// "<output>.manifest.json" for files, "<output>/manifest.json" for directories.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);
void write_manifest(const std::filesystem::path& output, const RunManifest& m);

}  // namespace mextract
