#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "mextract/benchmark.hpp"
#include "mextract/metadata.hpp"
#include "mextract/random.hpp"
#include "mextract/schema.hpp"
#include "mextract/text_util.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(MEXTRACT_SOURCE_DIR) / "data"; }

inline mextract::Schema model_schema() { return mextract::load_schema((data_dir() / "schemas/model.json").string()); }

inline std::string bert_text() { return mextract::read_file(data_dir() / "examples/bert.json"); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("mextract-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string pick(mextract::Rng& rng, const std::vector<std::string>& items) {
  return items[rng.below(items.size())];
}

inline std::string random_words(mextract::Rng& rng, std::size_t lo, std::size_t hi) {
  static const std::vector<std::string> kWords = {"alpha", "beta",  "gamma", "delta", "model", "large",
                                                  "tiny",  "chat",  "base",  "lm",    "net",   "bert"};
  const auto n = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += pick(rng, kWords);
  }
  return out;
}

/// A gold record for the model schema whose every value satisfies its own
/// constraint.
inline mextract::Json random_model_gold(mextract::Rng& rng) {
  using mextract::Json;
  auto model_struct = [&]() {
    Json m = Json::object();
    m["Name"] = random_words(rng, 1, 3);
    m["Num_Parameters"] = static_cast<double>(rng.between(1, 1000));
    m["Unit"] = pick(rng, {"Million", "Billion", "Trillion"});
    m["Type"] = pick(rng, {"Base", "Code", "Chat"});
    m["Think"] = rng.below(2) == 1;
    return m;
  };
  Json g = Json::object();
  g["Name"] = random_words(rng, 1, 5);
  g["Num_Parameters"] = static_cast<double>(rng.between(1, 1000)) / 2.0;
  g["Unit"] = pick(rng, {"Million", "Billion", "Trillion"});
  g["Type"] = pick(rng, {"Base", "Code", "Chat"});
  g["Think"] = rng.below(2) == 1;
  g["Version"] = static_cast<double>(rng.between(0, 40)) / 10.0;
  Json models = Json::array();
  for (auto n = rng.between(1, 4); n > 0; --n) models.push_back(model_struct());
  g["Models"] = models;
  g["License"] = pick(rng, {"Apache-2.0", "MIT License", "CC BY 4.0", "unknown", "custom"});
  g["Year"] = rng.between(1995, 2025);
  Json benches = Json::array();
  for (auto n = rng.between(1, 6); n > 0; --n) benches.push_back(pick(rng, {"GLUE", "MMLU", "GSM8K", "SQuAD v1.1", "SWAG", "HellaSwag", "ARC"}));
  g["Benchmarks"] = benches;
  g["Architecture"] = pick(rng, {"Transformer", "MoE", "SSM", "RNN", "CNN", "Hybrid", "other"});
  g["Context"] = rng.between(1, 131072);
  g["Language"] = pick(rng, {"monolingual", "bilingual", "multilingual"});
  g["Provider"] = random_words(rng, 1, 5);
  g["Modality"] = pick(rng, {"text", "audio", "video", "image", "multimodal"});
  g["Paper_Link"] = "https://example.org/paper/" + std::to_string(rng.below(100000)) + ".pdf";
  return g;
}

/// Existence flags with at least one present attribute.
inline mextract::Json random_exists(mextract::Rng& rng, const mextract::Schema& schema) {
  mextract::Json e = mextract::Json::object();
  bool any = false;
  for (const auto& spec : schema.attributes()) {
    const bool present = rng.below(4) != 0;
    any = any || present;
    e[spec.name] = present ? 1 : 0;
  }
  if (!any) e[schema.attributes().front().name] = 1;
  return e;
}

/// Raw JSONL lines of `n` synthetic model-category entries.
inline std::vector<mextract::Json> synthetic_lines(std::size_t n, std::uint64_t seed) {
  mextract::Rng rng(seed);
  const auto schema = model_schema();
  std::vector<mextract::Json> lines;
  for (std::size_t i = 0; i < n; ++i) {
    mextract::Json line = mextract::Json::object();
    line["paper_id"] = "p" + std::to_string(i);
    line["year"] = rng.between(2019, 2025);
    line["title"] = "Paper " + std::to_string(i);
    line["text"] = "text of paper " + std::to_string(i);
    line["gold"] = random_model_gold(rng);
    line["exists"] = random_exists(rng, schema);
    lines.push_back(std::move(line));
  }
  return lines;
}

/// Category of the i-th synthetic line.
inline std::string synthetic_category(std::size_t i) { return i % 2 == 0 ? "model" : "model-b"; }

/// In-memory dataset built from synthetic_lines, spread over two categories.
inline mextract::Dataset synthetic_dataset(std::size_t n, std::uint64_t seed) {
  mextract::Dataset ds;
  const auto schema = model_schema();
  for (const auto* c : {"model", "model-b"}) {
    ds.schema_by_category.emplace(c, schema);
    ds.guidelines_by_category.emplace(c, "Fill every attribute.");
  }
  const auto lines = synthetic_lines(n, seed);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto entry = mextract::gold_from_json(lines[i], synthetic_category(i));
    entry.gold = mextract::coerce_record(entry.gold, schema);
    entry.gold.cast_log().clear();
    ds.entries.push_back(std::move(entry));
  }
  return ds;
}

}  // namespace testing
