#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mextract/error.hpp"
#include "mextract/metadata.hpp"
#include "mextract/schema.hpp"

namespace mextract {

/// One annotated benchmark paper.
struct GoldEntry {
  std::string paper_id;
  std::string category;
  int year = 0;
  /// Paper title, used to keep benchmark papers out of training corpora.
  std::string title;
  /// Path of the extracted paper text, relative to the dataset root.
  std::string text_ref;
  /// Inline text; takes precedence over text_ref when present.
  std::optional<std::string> inline_text;
  MetadataRecord gold;
  /// attribute -> can the value be found in the paper.
  std::map<std::string, bool> exists;

  friend bool operator==(const GoldEntry&, const GoldEntry&) = default;
};

struct Dataset {
  std::filesystem::path root;
  std::map<std::string, Schema> schema_by_category;
  std::map<std::string, std::string> guidelines_by_category;
  std::vector<GoldEntry> entries;

  const Schema& schema_for(const GoldEntry& entry) const;
  const std::string& guidelines_for(const GoldEntry& entry) const;
  std::vector<const GoldEntry*> category(const std::string& name) const;
};

/// One JSONL line: {paper_id, year, [title], [text], gold, exists}.
Json gold_to_json(const GoldEntry& entry);
GoldEntry gold_from_json(const Json& line, const std::string& category);

/// Reads `root` laid out as schemas/<cat>.json, guidelines/<cat>.md,
/// gold/<cat>.jsonl and texts/<paper_id>.txt. Categories come from the gold
/// files and are ordered by name; entries keep file order within a category.
/// Gold records are coerced against their schema. Throws Error with
/// MissingSchema, MissingGuidelines, GoldTypeError, ExistenceKeyMismatch or
/// MissingText.
Dataset load_dataset(const std::filesystem::path& root);

/// Same layout, without invariant checks; gold records are kept as parsed.
/// Used by `data verify` so that every problem can be reported at once.
Dataset load_dataset_unchecked(const std::filesystem::path& root);

enum class Severity { Error, Warning, Info };

std::string_view to_string(Severity severity);

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string kind;
  std::string paper_id;
  std::string message;
};

/// Re-checks every dataset invariant. Hard violations are Errors; gold
/// values outside their own length constraints are Info; an attribute
/// flagged as present whose gold value is the empty default is a Warning.
std::vector<Diagnostic> verify_dataset(const Dataset& ds);

/// Text of the paper, from inline_text or root/text_ref.
std::string read_entry_text(const Dataset& ds, const GoldEntry& entry);

/// Lines of a JSONL file, skipping blank lines. Throws Error(Io).
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

}  // namespace mextract
