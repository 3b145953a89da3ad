#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mextract/schema.hpp"
#include "mextract/value.hpp"

namespace mextract {

enum class CastOutcome { CastOk, Defaulted, Dropped };

std::string_view to_string(CastOutcome outcome);

/// One coercion actually performed while normalizing a record.
struct CastEvent {
  std::string attribute;
  std::string from_type;
  std::string to_type;
  CastOutcome outcome = CastOutcome::CastOk;
  std::string note;

  friend bool operator==(const CastEvent&, const CastEvent&) = default;
};

/// A parsed metadata document: ordered attribute -> value map plus the
/// diagnostics accumulated while parsing and coercing it.
class MetadataRecord {
 public:
  using Entry = std::pair<std::string, Value>;

  const std::vector<Entry>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  const Value* find(std::string_view name) const;
  const Value& at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  /// Inserts at the end, or replaces in place when the key exists.
  void set(std::string name, Value value);

  std::vector<CastEvent>& cast_log() { return cast_log_; }
  const std::vector<CastEvent>& cast_log() const { return cast_log_; }

  /// Equality ignores the cast log.
  friend bool operator==(const MetadataRecord& a, const MetadataRecord& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<Entry> values_;
  std::vector<CastEvent> cast_log_;
};

/// Record holding every schema attribute at its type-correct empty value.
MetadataRecord default_metadata(const Schema& schema);

/// Reads a record from raw model output. Candidates, in order: the whole
/// text, the first fenced code block, the first balanced {...} substring.
/// Throws Error(NoJsonFound) when none parses to a JSON object.
MetadataRecord parse_metadata(std::string_view text);

/// Non-throwing variant of parse_metadata.
std::optional<MetadataRecord> try_parse_metadata(std::string_view text);

/// Locates a JSON object in free text using the same candidate order as
/// parse_metadata. Duplicate keys resolve to the last occurrence; their
/// names are appended to `duplicates` when provided.
std::optional<Json> find_json_object(std::string_view text,
                                     std::vector<std::string>* duplicates = nullptr);

MetadataRecord record_from_json(const Json& object);
Json record_to_json(const MetadataRecord& record);

/// Canonical text form: 4-space indented JSON, keys in record order.
std::string serialize_record(const MetadataRecord& record);

struct CoerceResult {
  Value value;
  std::vector<CastEvent> events;
};

/// Total coercion of `value` into the shape of `spec`. Values that cannot be
/// converted become the spec's default and are logged as Defaulted.
CoerceResult coerce(const Value& value, const AttributeSpec& spec);

/// Projects a record onto the schema: schema order, missing attributes
/// defaulted, extra attributes dropped, every value coerced. The output log
/// is the input log followed by the events of this pass.
MetadataRecord coerce_record(const MetadataRecord& record, const Schema& schema);

/// True when the record has exactly the schema's attributes, in order, each
/// type-valid.
bool is_record_type_valid(const MetadataRecord& record, const Schema& schema);

}  // namespace mextract
