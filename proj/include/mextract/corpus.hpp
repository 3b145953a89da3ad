#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mextract/benchmark.hpp"
#include "mextract/extractor.hpp"

namespace mextract {

enum class StubSource { Arxiv, Acl };

std::string_view to_string(StubSource s);

/// Title and abstract of a candidate paper.
struct PaperStub {
  std::string stub_id;
  std::string title;
  std::string abstract;
  StubSource source = StubSource::Arxiv;
  std::optional<std::string> category;
  std::optional<std::string> reasoning;
  /// Set when classification failed; category is then "none".
  bool flagged = false;
  std::string flag_note;

  friend bool operator==(const PaperStub&, const PaperStub&) = default;
};

Json stub_to_json(const PaperStub& stub);
PaperStub stub_from_json(const Json& j);

/// ar, en, fr, ru, jp, other, multi, none
const std::vector<std::string>& stub_categories();
/// Categories kept by balancing: every language category (not other/none).
bool is_balanced_category(std::string_view category);

/// System prompt for resource-paper classification.
std::string_view classifier_system_prompt();

struct Classification {
  std::string category;
  std::string reasoning;
  int attempts = 0;
};

/// Asks the endpoint for {"reasoning", "category"}; responses that do not
/// parse or name a category outside the closed set are retried up to
/// cfg.max_attempts times, then Error(InvalidCategory) is thrown.
Classification classify_stub(const PaperStub& stub, const InferenceConfig& cfg, ChatBackend& backend);

/// Classifies every stub with bounded parallelism. Failures set category
/// "none" and raise the flag instead of guessing.
void classify_stubs(std::vector<PaperStub>& stubs, const InferenceConfig& cfg, ChatBackend& backend);

/// Lowercase, ASCII punctuation removed, whitespace collapsed and trimmed.
std::string normalize_title(std::string_view title);

struct DedupLogEntry {
  std::string kept_id;
  std::string removed_id;
  /// ROUGE-L F between the two abstracts, logged for auditing.
  double abstract_similarity = 0.0;
};

struct DedupResult {
  std::vector<PaperStub> stubs;
  std::size_t removed_count = 0;
  std::vector<DedupLogEntry> log;
};

/// One survivor per normalized title: ACL preferred, then the smallest
/// stub_id. Survivors keep their input order.
DedupResult dedup(const std::vector<PaperStub>& stubs);

/// Drops stubs whose normalized title matches one of `titles`.
std::vector<PaperStub> exclude_benchmark(const std::vector<PaperStub>& stubs,
                                         const std::vector<std::string>& titles);
std::vector<PaperStub> exclude_benchmark(const std::vector<PaperStub>& stubs, const Dataset& dataset);

/// Per category, keeps a seeded uniform sample of `cap` stubs when the
/// category is larger than `cap`. Kept stubs stay in input order.
std::vector<PaperStub> balance(const std::vector<PaperStub>& stubs, std::size_t cap, std::uint64_t seed);

}  // namespace mextract
