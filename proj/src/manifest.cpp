#include "mextract/manifest.hpp"

#include <chrono>
#include <ctime>

#include "mextract/hashing.hpp"
#include "mextract/text_util.hpp"

#ifndef MEXTRACT_VERSION
#define MEXTRACT_VERSION "0.0.0"
#endif

namespace mextract {

namespace fs = std::filesystem;

std::string_view tool_version() { return MEXTRACT_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const fs::path& path) {
  if (fs::is_directory(path)) {
    // Hash every regular file, keyed by its path, in a stable order.
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files[e.path().generic_string()] = sha256_hex(read_file(e.path()));
    }
    input_hashes.insert(files.begin(), files.end());
    return;
  }
  input_hashes[path.generic_string()] = sha256_hex(read_file(path));
}

void RunManifest::start() { started_at = utc_timestamp(); }
void RunManifest::finish() { finished_at = utc_timestamp(); }

Json manifest_to_json(const RunManifest& m) {
  Json j = Json::object();
  j["command"] = m.command;
  j["version"] = m.version;
  j["config"] = m.config;
  j["inputs"] = Json::object();
  for (const auto& [path, hash] : m.input_hashes) j["inputs"][path] = hash;
  j["template_hash"] = m.template_hash ? Json(*m.template_hash) : Json(nullptr);
  j["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  if (!m.attempts.empty()) {
    j["attempts"] = Json::object();
    for (const auto& [id, n] : m.attempts) j["attempts"][id] = n;
  }
  return j;
}

RunManifest manifest_from_json(const Json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.version = j.value("version", std::string{});
    m.config = j.value("config", Json::object());
    if (auto in = j.find("inputs"); in != j.end()) {
      for (const auto& [path, hash] : in->items()) m.input_hashes[path] = hash.get<std::string>();
    }
    if (auto t = j.find("template_hash"); t != j.end() && t->is_string()) m.template_hash = t->get<std::string>();
    if (auto s = j.find("seed"); s != j.end() && s->is_number_unsigned()) m.seed = s->get<std::uint64_t>();
    m.started_at = j.value("started_at", std::string{});
    m.finished_at = j.value("finished_at", std::string{});
    if (auto a = j.find("attempts"); a != j.end()) {
      for (const auto& [id, n] : a->items()) m.attempts[id] = n.get<int>();
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("bad manifest: ") + e.what());
  }
}

fs::path manifest_path_for(const fs::path& output) {
  if (fs::is_directory(output)) return output / "manifest.json";
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

void write_manifest(const fs::path& output, const RunManifest& m) {
  write_file(manifest_path_for(output), dump_pretty(manifest_to_json(m)) + "\n");
}

}  // namespace mextract
